#include "seedloop/seeds.hpp"

#include <algorithm>
#include <cmath>

#include "seedloop/error.hpp"

namespace seedloop {

namespace {

void require_same_shape(const SeedState& a, const SeedState& b, const char* what) {
  require(a.probs.same_shape(b.probs), ErrorCode::ShapeMismatch, what);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

bool SeedState::column_is_zero(std::size_t j) const {
  for (std::size_t c = 0; c < n_categories(); ++c)
    if (probs(c, j) != 0.0) return false;
  return true;
}

std::size_t SeedState::argmax(std::size_t j) const {
  std::size_t best = 0;
  for (std::size_t c = 1; c < n_categories(); ++c)
    if (probs(c, j) > probs(best, j)) best = c;
  return best;
}

void SeedState::validate() const {
  require(n_categories() >= 1 && n_regions() >= 1, ErrorCode::InvalidArgument, "empty seed state");
  for (std::size_t j = 0; j < n_regions(); ++j) {
    double sum = 0.0;
    for (std::size_t c = 0; c < n_categories(); ++c) {
      const double v = probs(c, j);
      require(std::isfinite(v) && in_unit(v), ErrorCode::InvalidArgument, "seed probability outside [0,1]");
      sum += v;
    }
    require(sum <= 1.0 + 1e-6, ErrorCode::InvalidArgument, "seed column sums to more than 1");
  }
}

void GateParams::validate() const {
  require(in_unit(alpha_fg) && in_unit(alpha_bg) && in_unit(beta_fg) && in_unit(beta_bg), ErrorCode::InvalidParams,
          "gate thresholds must lie in [0,1]");
}

void ConvergenceParams::validate() const {
  require(delta > 0.0, ErrorCode::InvalidParams, "delta must be > 0");
  require(rho > 0.0 && rho <= 1.0, ErrorCode::InvalidParams, "rho must lie in (0,1]");
}

SeedState gate(const SeedState& s, double t_fg, double t_bg) {
  require(in_unit(t_fg) && in_unit(t_bg), ErrorCode::InvalidParams, "gate thresholds must lie in [0,1]");
  SeedState out = s;
  for (std::size_t j = 0; j < s.n_regions(); ++j) {
    const std::size_t top = s.argmax(j);
    const double t = top == 0 ? t_bg : t_fg;
    if (s(top, j) < t)
      for (std::size_t c = 0; c < s.n_categories(); ++c) out(c, j) = 0.0;
  }
  return out;
}

SeedState walk_step(const SeedState& s_gated, const RelationshipMatrix& rel, const SeedState& nout_gated) {
  require_same_shape(s_gated, nout_gated, "seed and network-output shapes differ");
  require(rel.size() == s_gated.n_regions() && rel.rel.cols() == s_gated.n_regions(), ErrorCode::ShapeMismatch,
          "relationship matrix size does not match region count");
  const std::size_t C = s_gated.n_categories(), N = s_gated.n_regions();
  SeedState out(C, N);
  std::vector<double> acc(N);
  for (std::size_t c = 0; c < C; ++c) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      const double v = s_gated(c, i);
      if (v == 0.0) continue;
      const auto row = rel.rel.row(i);
      for (std::size_t j = 0; j < N; ++j)
        if (row[j]) acc[j] += v;
    }
    for (std::size_t j = 0; j < N; ++j) out(c, j) = std::clamp(acc[j], 0.0, 1.0) * nout_gated(c, j);
  }
  return out;
}

SeedState custom_walk(const SeedState& s, const RelationshipMatrix& rel, const SeedState& nout,
                      const GateParams& gates, int steps, bool strict) {
  require(steps >= 1, ErrorCode::InvalidParams, "walk steps must be >= 1");
  require_same_shape(s, nout, "seed and network-output shapes differ");
  gates.validate();
  const SeedState start = gate(s, gates.alpha_fg, gates.alpha_bg);
  const SeedState guide = gate(nout, gates.beta_fg, gates.beta_bg);
  SeedState walked = start;
  for (int k = 0; k < steps; ++k) walked = walk_step(walked, rel, guide);
  if (strict) return walked;

  // Entrywise max with the gated seeds; a column pushed above unit mass is
  // rescaled to sum 1, which keeps its support.
  SeedState mixed = walked;
  for (std::size_t j = 0; j < start.n_regions(); ++j) {
    double sum = 0.0;
    for (std::size_t c = 0; c < start.n_categories(); ++c) {
      mixed(c, j) = std::max(start(c, j), walked(c, j));
      sum += mixed(c, j);
    }
    if (sum > 1.0)
      for (std::size_t c = 0; c < start.n_categories(); ++c) mixed(c, j) /= sum;
  }
  return mixed;
}

SeedState seed_update(const SeedState& s_old, const SeedState& nout, double w) {
  require(w >= 0.0 && w <= 1.0, ErrorCode::WOutOfRange, "update rate w must lie in [0,1]");
  require_same_shape(s_old, nout, "seed and network-output shapes differ");
  SeedState out = s_old;
  auto& d = out.probs.data();
  const auto& n = nout.probs.data();
  // Equal entries are left untouched so S_old == N_out is an exact fixed point.
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] != n[i]) d[i] = (1.0 - w) * d[i] + w * n[i];
  return out;
}

ConvergenceResult convergence_check(const SeedState& prev, const SeedState& next, const ConvergenceParams& params) {
  params.validate();
  require_same_shape(prev, next, "seed states differ in shape");
  const std::size_t N = prev.n_regions();
  std::size_t unchanged = 0;
  for (std::size_t j = 0; j < N; ++j) {
    double l1 = 0.0;
    for (std::size_t c = 0; c < prev.n_categories(); ++c) l1 += std::abs(next(c, j) - prev(c, j));
    if (l1 < params.delta) ++unchanged;
  }
  const double fraction = N == 0 ? 1.0 : static_cast<double>(unchanged) / static_cast<double>(N);
  return {fraction >= params.rho, fraction};
}

LabelMap labels_from_state(const SeedState& s, const SuperpixelMap& spmap) {
  require(static_cast<std::size_t>(spmap.n_regions) == s.n_regions(), ErrorCode::ShapeMismatch,
          "seed state region count does not match superpixel map");
  require(s.n_categories() <= kIgnoreLabel, ErrorCode::ShapeMismatch, "too many categories for u8 labels");
  std::vector<std::uint8_t> per_region(s.n_regions());
  for (std::size_t j = 0; j < s.n_regions(); ++j)
    per_region[j] = s.column_is_zero(j) ? kIgnoreLabel : static_cast<std::uint8_t>(s.argmax(j));
  LabelMap out(spmap.width, spmap.height);
  for (std::size_t p = 0; p < spmap.pixels(); ++p) out.labels[p] = per_region[spmap.region_of[p]];
  return out;
}

Tensor seeds_to_tensor(const SeedState& s) {
  std::vector<float> v(s.probs.data().begin(), s.probs.data().end());
  return Tensor::f32({static_cast<std::uint32_t>(s.n_categories()), static_cast<std::uint32_t>(s.n_regions())},
                     std::move(v));
}

SeedState seeds_from_tensor(const Tensor& t) {
  require(t.dtype() == DType::F32 && t.dims.size() == 2, ErrorCode::ShapeMismatch,
          "seed tensor must be f32 with dims [C,N]");
  SeedState s(t.dims[0], t.dims[1]);
  const auto& v = t.values<float>();
  for (std::size_t i = 0; i < v.size(); ++i) s.probs.data()[i] = v[i];
  s.validate();
  return s;
}

}  // namespace seedloop
