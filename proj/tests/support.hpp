#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "seedloop/error.hpp"
#include "seedloop/pipeline.hpp"

namespace testing_support {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("seedloop_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::vector<unsigned char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Blocky random image: a few constant-colour rectangles plus mild noise, so
// segmentations have a handful of meaningful regions.
inline seedloop::RasterImage random_image(std::mt19937_64& rng, int w, int h, int blocks = 6, double noise = 6.0) {
  std::uniform_int_distribution<int> col(0, 255), xs(0, w - 1), ys(0, h - 1);
  std::normal_distribution<double> n(0.0, noise);
  std::vector<double> rgb(static_cast<std::size_t>(w) * h * 3);
  const int base[3] = {col(rng), col(rng), col(rng)};
  for (std::size_t p = 0; p < rgb.size(); ++p) rgb[p] = base[p % 3];
  for (int b = 0; b < blocks; ++b) {
    int x0 = xs(rng), x1 = xs(rng), y0 = ys(rng), y1 = ys(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const int c[3] = {col(rng), col(rng), col(rng)};
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        for (int k = 0; k < 3; ++k) rgb[3 * (static_cast<std::size_t>(y) * w + x) + k] = c[k];
  }
  seedloop::RasterImage img(w, h);
  for (std::size_t p = 0; p < rgb.size(); ++p)
    img.data[p] = static_cast<std::uint8_t>(std::clamp(std::lround(rgb[p] + n(rng)), 0L, 255L));
  return img;
}

// Superpixel map with at most max_regions regions built by the real pipeline.
inline seedloop::SuperpixelMap random_spmap(std::mt19937_64& rng, int w, int h, int max_regions) {
  seedloop::SegParams p;
  p.k = 50.0;
  p.sigma = 0.5;
  p.min_size = 4;
  p.merge_thresh = 0.0;
  p.max_regions = max_regions;
  return seedloop::compute_superpixels(random_image(rng, w, h, 10, 20.0), p);
}

inline seedloop::FeatureMatrix random_features(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  seedloop::Dense<double> v(n, d);
  for (auto& x : v.data()) x = g(rng);
  return seedloop::FeatureMatrix{std::move(v)};
}

}  // namespace testing_support
