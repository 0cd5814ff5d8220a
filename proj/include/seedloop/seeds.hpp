#pragma once

#include "seedloop/matrix.hpp"
#include "seedloop/relgraph.hpp"
#include "seedloop/superpixel.hpp"
#include "seedloop/tensorio.hpp"

namespace seedloop {

/// Categories x superpixels probabilities. Category 0 is background; an
/// all-zero column marks an ignored superpixel.
struct SeedState {
  Dense<double> probs;

  SeedState() = default;
  SeedState(std::size_t n_categories, std::size_t n_regions) : probs(n_categories, n_regions, 0.0) {}
  explicit SeedState(Dense<double> p) : probs(std::move(p)) {}

  std::size_t n_categories() const { return probs.rows(); }
  std::size_t n_regions() const { return probs.cols(); }
  double operator()(std::size_t c, std::size_t j) const { return probs(c, j); }
  double& operator()(std::size_t c, std::size_t j) { return probs(c, j); }

  bool column_is_zero(std::size_t j) const;
  /// Dominant category; ties go to the smaller id.
  std::size_t argmax(std::size_t j) const;
  /// Entries in [0,1], column sums <= 1 + 1e-6.
  void validate() const;

  friend bool operator==(const SeedState&, const SeedState&) = default;
};

struct GateParams {
  double alpha_fg = 0.90;
  double alpha_bg = 0.90;
  double beta_fg = 0.75;
  double beta_bg = 0.90;

  void validate() const;
};

struct ConvergenceParams {
  double delta = 0.1;
  double rho = 0.95;

  void validate() const;
};

struct ConvergenceResult {
  bool stopped;
  double unchanged_fraction;
};

/// Zeroes every column whose dominant probability is below its threshold
/// (t_bg when the dominant category is background, t_fg otherwise).
SeedState gate(const SeedState& s, double t_fg, double t_bg);

/// One propagation step: clamp01(s x rel) (.) nout, per category row.
SeedState walk_step(const SeedState& s_gated, const RelationshipMatrix& rel, const SeedState& nout_gated);

/// Gates seeds (alpha) and network output (beta), propagates `steps` times and
/// merges with the gated seeds by entrywise max. With strict = true the raw
/// propagation result is returned.
SeedState custom_walk(const SeedState& s, const RelationshipMatrix& rel, const SeedState& nout,
                      const GateParams& gates, int steps, bool strict = false);

/// (1 - w) * s_old + w * nout.
SeedState seed_update(const SeedState& s_old, const SeedState& nout, double w);

ConvergenceResult convergence_check(const SeedState& prev, const SeedState& next, const ConvergenceParams& params);

/// Argmax per superpixel (255 for zero columns), broadcast to pixels.
LabelMap labels_from_state(const SeedState& s, const SuperpixelMap& spmap);

Tensor seeds_to_tensor(const SeedState& s);
SeedState seeds_from_tensor(const Tensor& t);

}  // namespace seedloop
