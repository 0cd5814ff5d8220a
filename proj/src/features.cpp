#include "seedloop/features.hpp"

#include <cmath>
#include <numbers>

#include "seedloop/error.hpp"

namespace seedloop {

namespace {

constexpr int kOrientationBins = 8;

void check_dims(const RasterImage& image, const SuperpixelMap& spmap) {
  image.validate();
  require(spmap.width == image.width && spmap.height == image.height && spmap.region_of.size() == image.pixels(),
          ErrorCode::DimensionMismatch, "superpixel map does not match image dimensions");
  require(spmap.n_regions >= 1, ErrorCode::InvalidArgument, "superpixel map has no regions");
}

}  // namespace

Dense<double> raw_region_descriptors(const RasterImage& image, const SuperpixelMap& spmap) {
  check_dims(image, spmap);
  const int W = image.width, H = image.height;
  const std::size_t N = spmap.n_regions;

  std::vector<double> gray(image.pixels());
  for (std::size_t p = 0; p < gray.size(); ++p)
    gray[p] = (static_cast<double>(image.data[3 * p]) + image.data[3 * p + 1] + image.data[3 * p + 2]) / 3.0;

  // Central differences inside, one-sided at the border.
  auto derivative = [&](int x, int y, int dx, int dy) {
    const int lo_x = x - dx, hi_x = x + dx, lo_y = y - dy, hi_y = y + dy;
    const bool has_lo = lo_x >= 0 && lo_y >= 0;
    const bool has_hi = hi_x < W && hi_y < H;
    const double here = gray[y * W + x];
    if (has_lo && has_hi) return (gray[hi_y * W + hi_x] - gray[lo_y * W + lo_x]) / 2.0;
    if (has_hi) return gray[hi_y * W + hi_x] - here;
    if (has_lo) return here - gray[lo_y * W + lo_x];
    return 0.0;
  };

  Dense<double> out(N, kHandcraftedDims, 0.0);
  std::vector<double> count(N, 0.0);
  for (std::size_t p = 0; p < image.pixels(); ++p) {
    const auto r = static_cast<std::size_t>(spmap.region_of[p]);
    count[r] += 1.0;
    for (int c = 0; c < 3; ++c) out(r, c) += image.data[3 * p + c];
  }
  for (std::size_t r = 0; r < N; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) /= count[r];

  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * W + x;
      const auto r = static_cast<std::size_t>(spmap.region_of[p]);
      for (int c = 0; c < 3; ++c) {
        const double d = image.data[3 * p + c] - out(r, c);
        out(r, 3 + c) += d * d;
      }
      const double gx = derivative(x, y, 1, 0);
      const double gy = derivative(x, y, 0, 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      out(r, 6) += mag;
      if (mag > 0.0) {
        const double angle = std::atan2(gy, gx) + std::numbers::pi;  // [0, 2pi]
        int bin = static_cast<int>(std::floor(angle / (2.0 * std::numbers::pi) * kOrientationBins));
        bin = ((bin % kOrientationBins) + kOrientationBins) % kOrientationBins;
        out(r, 7 + bin) += mag;
      }
    }

  for (std::size_t r = 0; r < N; ++r) {
    for (int c = 0; c < 3; ++c) out(r, 3 + c) = std::sqrt(out(r, 3 + c) / count[r]);
    double hist_total = 0.0;
    for (int b = 0; b < kOrientationBins; ++b) hist_total += out(r, 7 + b);
    for (int b = 0; b < kOrientationBins; ++b)
      out(r, 7 + b) = hist_total > 0.0 ? out(r, 7 + b) / hist_total : 1.0 / kOrientationBins;
    out(r, 6) /= count[r];
  }
  return out;
}

Dense<double> standardize(Dense<double> values) {
  const std::size_t N = values.rows(), D = values.cols();
  if (N == 0) return values;
  for (std::size_t d = 0; d < D; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < N; ++i) mean += values(i, d);
    mean /= static_cast<double>(N);
    double var = 0.0;
    for (std::size_t i = 0; i < N; ++i) var += (values(i, d) - mean) * (values(i, d) - mean);
    const double sd = std::sqrt(var / static_cast<double>(N));
    const bool constant = sd <= 1e-9 * std::max(1.0, std::abs(mean));
    for (std::size_t i = 0; i < N; ++i) values(i, d) = constant ? 0.0 : (values(i, d) - mean) / sd;
  }
  return values;
}

FeatureMatrix superpixel_features(const RasterImage& image, const SuperpixelMap& spmap) {
  return FeatureMatrix{standardize(raw_region_descriptors(image, spmap))};
}

FeatureMatrix features_from_tensor(const Tensor& t, std::size_t n_regions) {
  require(t.dtype() == DType::F32 && t.dims.size() == 2, ErrorCode::ShapeMismatch,
          "feature tensor must be f32 with dims [N,D]");
  require(t.dims[0] == n_regions, ErrorCode::ShapeMismatch,
          "feature tensor has " + std::to_string(t.dims[0]) + " rows, expected " + std::to_string(n_regions));
  require(t.dims[1] >= 1, ErrorCode::ShapeMismatch, "feature tensor has zero dimensions");
  Dense<double> v(t.dims[0], t.dims[1]);
  const auto& src = t.values<float>();
  for (std::size_t i = 0; i < src.size(); ++i) v.data()[i] = src[i];
  return FeatureMatrix{standardize(std::move(v))};
}

FeatureMatrix load_external_features(const std::filesystem::path& path, std::size_t n_regions) {
  return features_from_tensor(load_tensor(path), n_regions);
}

Tensor features_to_tensor(const FeatureMatrix& f) {
  std::vector<float> v(f.values.data().begin(), f.values.data().end());
  return Tensor::f32({static_cast<std::uint32_t>(f.n_regions()), static_cast<std::uint32_t>(f.dims())}, std::move(v));
}

}  // namespace seedloop
