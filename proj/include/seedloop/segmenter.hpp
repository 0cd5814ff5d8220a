#pragma once

#include <memory>

#include "seedloop/features.hpp"
#include "seedloop/matrix.hpp"
#include "seedloop/seeds.hpp"
#include "seedloop/tensorio.hpp"

namespace seedloop {

/// Anything that maps superpixel features to per-superpixel category
/// distributions and can be trained on (mixed) seeds.
class Segmenter {
 public:
  virtual ~Segmenter() = default;

  virtual SeedState predict(const FeatureMatrix& f) const = 0;
  /// Runs `epochs` training passes; returns the loss before the last update.
  virtual double train_epochs(const FeatureMatrix& f, const SeedState& mixed, int epochs) = 0;
};

struct LinearGradient {
  Dense<double> weights;  // D x C
  std::vector<double> bias;
};

struct LossAndGrad {
  double loss;
  LinearGradient grad;
};

/// Softmax regression over superpixel features, trained by full-batch
/// gradient descent on cross-entropy over labelled superpixels plus ridge.
class LinearSegmenter final : public Segmenter {
 public:
  LinearSegmenter(std::size_t dims, std::size_t n_categories, double learning_rate = 1.0, double l2 = 1e-3);

  std::size_t dims() const { return weights_.rows(); }
  std::size_t n_categories() const { return weights_.cols(); }
  double learning_rate() const { return learning_rate_; }
  double l2() const { return l2_; }

  Dense<double>& weights() { return weights_; }
  const Dense<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  SeedState predict(const FeatureMatrix& f) const override;

  /// Mean cross-entropy over columns of `mixed` with nonzero mass (targets
  /// renormalized to sum 1) plus l2 * ||W||^2, with its exact gradient.
  LossAndGrad loss_and_grad(const FeatureMatrix& f, const SeedState& mixed) const;

  double train_epochs(const FeatureMatrix& f, const SeedState& mixed, int epochs) override;

  /// f32 tensor [D+1, C]: weight rows followed by the bias row.
  Tensor to_tensor() const;
  static LinearSegmenter from_tensor(const Tensor& t, double learning_rate = 1.0, double l2 = 1e-3);

 private:
  void log_softmax(const FeatureMatrix& f, std::size_t j, std::vector<double>& out) const;

  Dense<double> weights_;
  std::vector<double> bias_;
  double learning_rate_;
  double l2_;
};

}  // namespace seedloop
