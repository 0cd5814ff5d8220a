#include "seedloop/superpixel.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <tuple>
#include <cmath>
#include <set>
#include <unordered_map>

#include "disjoint_set.hpp"
#include "seedloop/error.hpp"

namespace seedloop {

namespace {

using detail::DisjointSet;

struct Edge {
  double w;
  int a;
  int b;
  bool diagonal;
};

// Separable Gaussian with clamped borders; sigma == 0 leaves the channel untouched.
std::vector<double> smooth_channel(const RasterImage& image, int channel, double sigma) {
  const int W = image.width, H = image.height;
  std::vector<double> src(image.pixels());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = image.data[3 * i + channel];
  if (sigma <= 0.0) return src;

  const int len = static_cast<int>(std::ceil(sigma * 4.0)) + 1;
  std::vector<double> mask(len);
  for (int i = 0; i < len; ++i) mask[i] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  double sum = mask[0];
  for (int i = 1; i < len; ++i) sum += 2.0 * mask[i];
  for (double& m : mask) m /= sum;

  std::vector<double> tmp(src.size());
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double acc = mask[0] * src[y * W + x];
      for (int i = 1; i < len; ++i)
        acc += mask[i] * (src[y * W + std::max(x - i, 0)] + src[y * W + std::min(x + i, W - 1)]);
      tmp[y * W + x] = acc;
    }
  std::vector<double> out(src.size());
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double acc = mask[0] * tmp[y * W + x];
      for (int i = 1; i < len; ++i)
        acc += mask[i] * (tmp[std::max(y - i, 0) * W + x] + tmp[std::min(y + i, H - 1) * W + x]);
      out[y * W + x] = acc;
    }
  return out;
}

std::vector<Edge> build_grid_edges(const RasterImage& image, double sigma) {
  const int W = image.width, H = image.height;
  const std::array<std::vector<double>, 3> ch = {smooth_channel(image, 0, sigma), smooth_channel(image, 1, sigma),
                                                 smooth_channel(image, 2, sigma)};
  auto diff = [&](int p, int q) {
    double s = 0.0;
    for (const auto& c : ch) s += (c[p] - c[q]) * (c[p] - c[q]);
    return std::sqrt(s);
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(W) * H * 4);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int p = y * W + x;
      if (x + 1 < W) edges.push_back({diff(p, p + 1), p, p + 1, false});
      if (y + 1 < H) edges.push_back({diff(p, p + W), p, p + W, false});
      if (x + 1 < W && y + 1 < H) edges.push_back({diff(p, p + W + 1), p, p + W + 1, true});
      if (x + 1 < W && y > 0) edges.push_back({diff(p, p - W + 1), p, p - W + 1, true});
    }
  // Stable sort keeps generation order among equal weights.
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) { return l.w < r.w; });
  return edges;
}

}  // namespace

void SegParams::validate() const {
  require(k > 0, ErrorCode::InvalidParams, "k must be > 0");
  require(sigma >= 0, ErrorCode::InvalidParams, "sigma must be >= 0");
  require(min_size >= 1, ErrorCode::InvalidParams, "min_size must be >= 1");
  require(merge_thresh >= 0, ErrorCode::InvalidParams, "merge_thresh must be >= 0");
  require(max_regions >= 0, ErrorCode::InvalidParams, "max_regions must be >= 0");
}

void SuperpixelMap::validate() const {
  require(width >= 1 && height >= 1 && region_of.size() == pixels(), ErrorCode::InvalidArgument,
          "superpixel map dimensions invalid");
  require(n_regions >= 1, ErrorCode::InvalidArgument, "superpixel map has no regions");
  std::vector<char> seen(n_regions, 0);
  for (auto r : region_of) {
    require(r >= 0 && r < n_regions, ErrorCode::InvalidArgument, "region id out of range");
    seen[r] = 1;
  }
  require(std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; }), ErrorCode::InvalidArgument,
          "region ids are not contiguous");
  DisjointSet dsu(static_cast<int>(pixels()));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int p = y * width + x;
      if (x + 1 < width && region_of[p] == region_of[p + 1]) {
        int a = dsu.find(p), b = dsu.find(p + 1);
        if (a != b) dsu.join(a, b);
      }
      if (y + 1 < height && region_of[p] == region_of[p + width]) {
        int a = dsu.find(p), b = dsu.find(p + width);
        if (a != b) dsu.join(a, b);
      }
    }
  require(dsu.components() == n_regions, ErrorCode::InvalidArgument, "a region is not 4-connected");
}

SuperpixelMap relabel_contiguous(int width, int height, const std::vector<std::int32_t>& ids) {
  SuperpixelMap out{width, height, std::vector<std::int32_t>(ids.size()), 0};
  std::unordered_map<std::int32_t, std::int32_t> remap;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(ids[i], out.n_regions);
    if (inserted) ++out.n_regions;
    out.region_of[i] = it->second;
  }
  return out;
}

SuperpixelMap felzenszwalb(const RasterImage& image, const SegParams& params) {
  image.validate();
  params.validate();
  const int W = image.width, H = image.height;
  const int n = W * H;
  const auto edges = build_grid_edges(image, params.sigma);

  // Kruskal-style merging; threshold[root] = Int(C) + k/|C| with Int(singleton) = 0.
  DisjointSet merged(n);
  std::vector<double> threshold(n, params.k);
  for (const Edge& e : edges) {
    int a = merged.find(e.a), b = merged.find(e.b);
    if (a == b) continue;
    if (e.w <= threshold[a] && e.w <= threshold[b]) {
      const int root = merged.join(a, b);
      threshold[root] = e.w + params.k / merged.size(root);
    }
  }

  // Split components that are only diagonally connected.
  DisjointSet regions(n);
  for (const Edge& e : edges) {
    if (e.diagonal || merged.find(e.a) != merged.find(e.b)) continue;
    int a = regions.find(e.a), b = regions.find(e.b);
    if (a != b) regions.join(a, b);
  }

  // Absorb small regions into their cheapest 4-neighbour.
  for (const Edge& e : edges) {
    if (e.diagonal) continue;
    int a = regions.find(e.a), b = regions.find(e.b);
    if (a != b && (regions.size(a) < params.min_size || regions.size(b) < params.min_size)) regions.join(a, b);
  }

  std::vector<std::int32_t> ids(n);
  for (int p = 0; p < n; ++p) ids[p] = regions.find(p);
  return relabel_contiguous(W, H, ids);
}

SuperpixelMap rag_merge(const SuperpixelMap& spmap, const RasterImage& image, double merge_thresh,
                        int max_regions) {
  image.validate();
  require(spmap.width == image.width && spmap.height == image.height && spmap.region_of.size() == spmap.pixels(),
          ErrorCode::DimensionMismatch, "superpixel map does not match image dimensions");
  require(merge_thresh >= 0, ErrorCode::InvalidParams, "merge_thresh must be >= 0");
  const int N = spmap.n_regions;
  const int W = spmap.width, H = spmap.height;

  std::vector<std::array<double, 3>> color_sum(N, {0.0, 0.0, 0.0});
  std::vector<double> count(N, 0.0);
  std::vector<std::set<int>> neighbors(N);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int p = y * W + x;
      const int r = spmap.region_of[p];
      for (int c = 0; c < 3; ++c) color_sum[r][c] += image.data[3 * p + c];
      count[r] += 1.0;
      if (x + 1 < W && spmap.region_of[p + 1] != r) {
        neighbors[r].insert(spmap.region_of[p + 1]);
        neighbors[spmap.region_of[p + 1]].insert(r);
      }
      if (y + 1 < H && spmap.region_of[p + W] != r) {
        neighbors[r].insert(spmap.region_of[p + W]);
        neighbors[spmap.region_of[p + W]].insert(r);
      }
    }

  auto distance = [&](int a, int b) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = color_sum[a][c] / count[a] - color_sum[b][c] / count[b];
      s += d * d;
    }
    return std::sqrt(s);
  };

  // Ordered by (distance, smaller id, larger id).
  using Candidate = std::tuple<double, int, int>;
  std::set<Candidate> queue;
  std::vector<std::unordered_map<int, double>> pair_dist(N);
  auto push = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const double d = distance(a, b);
    queue.emplace(d, a, b);
    pair_dist[a][b] = d;
  };
  auto erase = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto it = pair_dist[a].find(b);
    if (it == pair_dist[a].end()) return;
    queue.erase(Candidate{it->second, a, b});
    pair_dist[a].erase(it);
  };
  for (int a = 0; a < N; ++a)
    for (int b : neighbors[a])
      if (a < b) push(a, b);

  std::vector<int> owner(N);
  std::iota(owner.begin(), owner.end(), 0);
  int remaining = N;
  while (!queue.empty()) {
    const auto [d, a, b] = *queue.begin();
    const bool over_cap = max_regions > 0 && remaining > max_regions;
    if (!(d < merge_thresh) && !over_cap) break;

    // b is absorbed into a (a < b).
    for (int nb : neighbors[a]) erase(a, nb);
    for (int nb : neighbors[b]) erase(b, nb);
    for (int nb : neighbors[b]) {
      neighbors[nb].erase(b);
      if (nb != a) {
        neighbors[nb].insert(a);
        neighbors[a].insert(nb);
      }
    }
    neighbors[a].erase(b);
    neighbors[b].clear();
    for (int c = 0; c < 3; ++c) color_sum[a][c] += color_sum[b][c];
    count[a] += count[b];
    owner[b] = a;
    --remaining;
    for (int nb : neighbors[a]) push(a, nb);
  }

  // Compact surviving ids in increasing order so an unmerged map is returned unchanged.
  std::vector<int> compact(N, -1);
  int next = 0;
  for (int r = 0; r < N; ++r) {
    int root = r;
    while (owner[root] != root) root = owner[root];
    if (root == r) compact[r] = next++;
  }
  SuperpixelMap out{W, H, std::vector<std::int32_t>(spmap.pixels()), next};
  for (std::size_t p = 0; p < spmap.pixels(); ++p) {
    int root = spmap.region_of[p];
    while (owner[root] != root) root = owner[root];
    out.region_of[p] = compact[root];
  }
  return out;
}

SuperpixelMap compute_superpixels(const RasterImage& image, const SegParams& params) {
  return rag_merge(felzenszwalb(image, params), image, params.merge_thresh, params.max_regions);
}

Tensor superpixels_to_tensor(const SuperpixelMap& spmap) {
  require(spmap.n_regions <= 65536, ErrorCode::DimOverflow, "too many regions for a u16 tensor");
  std::vector<std::uint16_t> v(spmap.region_of.begin(), spmap.region_of.end());
  return Tensor::u16({static_cast<std::uint32_t>(spmap.height), static_cast<std::uint32_t>(spmap.width)},
                     std::move(v));
}

SuperpixelMap superpixels_from_tensor(const Tensor& t) {
  require(t.dtype() == DType::U16 && t.dims.size() == 2, ErrorCode::ShapeMismatch,
          "superpixel tensor must be u16 with dims [H,W]");
  SuperpixelMap sp;
  sp.height = static_cast<int>(t.dims[0]);
  sp.width = static_cast<int>(t.dims[1]);
  const auto& v = t.values<std::uint16_t>();
  sp.region_of.assign(v.begin(), v.end());
  sp.n_regions = v.empty() ? 0 : *std::max_element(v.begin(), v.end()) + 1;
  sp.validate();
  return sp;
}

}  // namespace seedloop
