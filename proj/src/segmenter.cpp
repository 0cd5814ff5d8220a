#include "seedloop/segmenter.hpp"

#include <algorithm>
#include <cmath>

#include "seedloop/error.hpp"

namespace seedloop {

LinearSegmenter::LinearSegmenter(std::size_t dims, std::size_t n_categories, double learning_rate, double l2)
    : weights_(dims, n_categories, 0.0), bias_(n_categories, 0.0), learning_rate_(learning_rate), l2_(l2) {
  require(dims >= 1 && n_categories >= 1, ErrorCode::InvalidParams, "segmenter needs D >= 1 and C >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorCode::InvalidParams, "learning rate must be > 0");
  require(std::isfinite(l2) && l2 >= 0.0, ErrorCode::InvalidParams, "l2 must be >= 0");
}

void LinearSegmenter::log_softmax(const FeatureMatrix& f, std::size_t j, std::vector<double>& out) const {
  const std::size_t C = n_categories(), D = dims();
  for (std::size_t c = 0; c < C; ++c) {
    double z = bias_[c];
    for (std::size_t d = 0; d < D; ++d) z += weights_(d, c) * f.values(j, d);
    out[c] = z;
  }
  const double top = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double z : out) sum += std::exp(z - top);
  const double lse = top + std::log(sum);
  for (double& z : out) z -= lse;
}

SeedState LinearSegmenter::predict(const FeatureMatrix& f) const {
  require(f.dims() == dims(), ErrorCode::ShapeMismatch, "feature dimension does not match the model");
  const std::size_t N = f.n_regions(), C = n_categories();
  SeedState out(C, N);
  std::vector<double> logp(C);
  for (std::size_t j = 0; j < N; ++j) {
    log_softmax(f, j, logp);
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += (out(c, j) = std::exp(logp[c]));
    for (std::size_t c = 0; c < C; ++c) out(c, j) /= sum;
  }
  return out;
}

LossAndGrad LinearSegmenter::loss_and_grad(const FeatureMatrix& f, const SeedState& mixed) const {
  require(f.dims() == dims(), ErrorCode::ShapeMismatch, "feature dimension does not match the model");
  require(mixed.n_categories() == n_categories() && mixed.n_regions() == f.n_regions(), ErrorCode::ShapeMismatch,
          "seed state does not match features/model");
  const std::size_t N = f.n_regions(), C = n_categories(), D = dims();
  LossAndGrad out{0.0, {Dense<double>(D, C, 0.0), std::vector<double>(C, 0.0)}};
  std::size_t labelled = 0;
  std::vector<double> residual(C), logp(C);
  for (std::size_t j = 0; j < N; ++j) {
    double mass = 0.0;
    for (std::size_t c = 0; c < C; ++c) mass += mixed(c, j);
    if (mass <= 0.0) continue;
    ++labelled;
    log_softmax(f, j, logp);
    for (std::size_t c = 0; c < C; ++c) {
      const double y = mixed(c, j) / mass;
      if (y > 0.0) out.loss -= y * logp[c];
      residual[c] = std::exp(logp[c]) - y;
      out.grad.bias[c] += residual[c];
    }
    for (std::size_t d = 0; d < D; ++d) {
      const double x = f.values(j, d);
      for (std::size_t c = 0; c < C; ++c) out.grad.weights(d, c) += x * residual[c];
    }
  }
  require(labelled > 0, ErrorCode::NoLabeledRegions, "no superpixel carries seed mass");

  const double inv = 1.0 / static_cast<double>(labelled);
  out.loss *= inv;
  for (double& g : out.grad.bias) g *= inv;
  auto& gw = out.grad.weights.data();
  const auto& w = weights_.data();
  double norm2 = 0.0;
  for (std::size_t i = 0; i < gw.size(); ++i) {
    gw[i] = gw[i] * inv + 2.0 * l2_ * w[i];
    norm2 += w[i] * w[i];
  }
  out.loss += l2_ * norm2;
  return out;
}

double LinearSegmenter::train_epochs(const FeatureMatrix& f, const SeedState& mixed, int epochs) {
  require(epochs >= 1, ErrorCode::InvalidParams, "epochs must be >= 1");
  double loss = 0.0;
  for (int e = 0; e < epochs; ++e) {
    const LossAndGrad lg = loss_and_grad(f, mixed);
    loss = lg.loss;
    auto& w = weights_.data();
    const auto& gw = lg.grad.weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate_ * gw[i];
    for (std::size_t c = 0; c < bias_.size(); ++c) bias_[c] -= learning_rate_ * lg.grad.bias[c];
  }
  return loss;
}

Tensor LinearSegmenter::to_tensor() const {
  std::vector<float> v(weights_.data().begin(), weights_.data().end());
  v.insert(v.end(), bias_.begin(), bias_.end());
  return Tensor::f32({static_cast<std::uint32_t>(dims() + 1), static_cast<std::uint32_t>(n_categories())},
                     std::move(v));
}

LinearSegmenter LinearSegmenter::from_tensor(const Tensor& t, double learning_rate, double l2) {
  require(t.dtype() == DType::F32 && t.dims.size() == 2 && t.dims[0] >= 2, ErrorCode::ShapeMismatch,
          "model tensor must be f32 with dims [D+1,C]");
  LinearSegmenter m(t.dims[0] - 1, t.dims[1], learning_rate, l2);
  const auto& v = t.values<float>();
  const std::size_t wn = m.weights_.data().size();
  for (std::size_t i = 0; i < wn; ++i) m.weights_.data()[i] = v[i];
  for (std::size_t c = 0; c < m.bias_.size(); ++c) m.bias_[c] = v[wn + c];
  return m;
}

}  // namespace seedloop
