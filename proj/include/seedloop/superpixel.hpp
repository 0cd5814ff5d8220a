#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "seedloop/tensorio.hpp"

namespace seedloop {

/// Per-pixel region ids, contiguous in 0..n_regions-1, each region 4-connected.
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> region_of;
  int n_regions = 0;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  std::int32_t at(int x, int y) const { return region_of[static_cast<std::size_t>(y) * width + x]; }

  /// Checks contiguity, non-emptiness and 4-connectivity of every region.
  void validate() const;
};

struct SegParams {
  double k = 100.0;
  double sigma = 0.8;
  int min_size = 20;
  double merge_thresh = 25.0;
  int max_regions = 0;  // 0 = no cap

  void validate() const;
};

/// Graph-based segmentation on the 8-connected pixel grid. Regions joined only
/// through diagonal edges are split so every output region is 4-connected.
SuperpixelMap felzenszwalb(const RasterImage& image, const SegParams& params);

/// Greedy mean-colour merging of 4-adjacent regions while the closest pair is
/// nearer than merge_thresh. With max_regions > 0, merging continues past the
/// threshold until at most max_regions remain.
SuperpixelMap rag_merge(const SuperpixelMap& spmap, const RasterImage& image, double merge_thresh,
                        int max_regions = 0);

/// felzenszwalb followed by rag_merge.
SuperpixelMap compute_superpixels(const RasterImage& image, const SegParams& params);

/// Renumbers regions by first occurrence in scan order.
SuperpixelMap relabel_contiguous(int width, int height, const std::vector<std::int32_t>& ids);

Tensor superpixels_to_tensor(const SuperpixelMap& spmap);
SuperpixelMap superpixels_from_tensor(const Tensor& t);

}  // namespace seedloop
