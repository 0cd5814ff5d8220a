#pragma once

#include <filesystem>

#include "seedloop/matrix.hpp"
#include "seedloop/superpixel.hpp"
#include "seedloop/tensorio.hpp"

namespace seedloop {

/// N regions x D descriptors, z-scored per dimension across regions.
struct FeatureMatrix {
  Dense<double> values;

  std::size_t n_regions() const { return values.rows(); }
  std::size_t dims() const { return values.cols(); }
};

inline constexpr std::size_t kHandcraftedDims = 15;

/// Raw (unstandardized) per-region descriptors: RGB mean (3), RGB stddev (3),
/// mean grayscale gradient magnitude (1), magnitude-weighted 8-bin gradient
/// orientation histogram normalized to sum 1 (8).
Dense<double> raw_region_descriptors(const RasterImage& image, const SuperpixelMap& spmap);

/// Per-column z-score; constant columns become all-zero.
Dense<double> standardize(Dense<double> values);

FeatureMatrix superpixel_features(const RasterImage& image, const SuperpixelMap& spmap);

/// Wraps an arbitrary [N,D] descriptor tensor, e.g. exported CNN activations.
FeatureMatrix features_from_tensor(const Tensor& t, std::size_t n_regions);
FeatureMatrix load_external_features(const std::filesystem::path& path, std::size_t n_regions);

Tensor features_to_tensor(const FeatureMatrix& f);

}  // namespace seedloop
