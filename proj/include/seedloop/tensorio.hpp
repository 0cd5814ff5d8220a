#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace seedloop {

inline constexpr std::uint8_t kIgnoreLabel = 255;

/// 8-bit RGB raster, row-major, channel-interleaved.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  static constexpr int kChannels = 3;

  RasterImage() = default;
  RasterImage(int w, int h);

  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  std::span<std::uint8_t, 3> at(int x, int y) {
    return std::span<std::uint8_t, 3>(data.data() + 3 * (static_cast<std::size_t>(y) * width + x), 3);
  }
  std::span<const std::uint8_t, 3> at(int x, int y) const {
    return std::span<const std::uint8_t, 3>(data.data() + 3 * (static_cast<std::size_t>(y) * width + x), 3);
  }
  void validate() const;
};

/// Per-pixel category ids; 255 marks ignored pixels.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;
  LabelMap(int w, int h, std::uint8_t fill = kIgnoreLabel);

  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  void validate() const;
};

enum class DType : std::uint8_t { F32 = 1, U16 = 2, U8 = 3 };

/// N-dimensional (1..4) row-major tensor carried between CLI stages.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::variant<std::vector<float>, std::vector<std::uint16_t>, std::vector<std::uint8_t>> payload;

  DType dtype() const;
  std::size_t element_count() const;
  void validate() const;

  template <class T>
  const std::vector<T>& values() const { return std::get<std::vector<T>>(payload); }
  template <class T>
  std::vector<T>& values() { return std::get<std::vector<T>>(payload); }

  static Tensor f32(std::vector<std::uint32_t> dims, std::vector<float> v);
  static Tensor u16(std::vector<std::uint32_t> dims, std::vector<std::uint16_t> v);
  static Tensor u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> v);
};

RasterImage load_ppm(const std::filesystem::path& path);
void save_ppm(const RasterImage& image, const std::filesystem::path& path);

LabelMap load_label_pgm(const std::filesystem::path& path);
void save_label_pgm(const LabelMap& map, const std::filesystem::path& path);

// DFNT container: "DFNT", u8 version, u8 dtype, u8 ndim, u32 dims, payload (all LE).
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

struct SyntheticParams {
  int width = 64;
  int height = 64;
  int n_categories = 4;           // background + foreground categories
  double noise_sigma = 10.0;      // additive Gaussian noise, intensity units
  double color_jitter = 12.0;     // per-shape color offset range
  double texture_amplitude = 30.0;  // background grating amplitude
  double shading = 45.0;          // linear shading across each shape, centre to edge
  int background_patches = 24;    // Voronoi cells of the background texture
  int shape_patches = 8;          // Voronoi cells per shape
  double patch_contrast = 30.0;   // per-channel offset range of a cell
  double seed_fraction = 0.10;    // fraction of each shape seeded
  int ring_inset = 2;             // distance of the background seed ring from the border
  int ring_width = 2;

  void validate() const;
};

struct SyntheticScene {
  RasterImage image;
  LabelMap gt;
  LabelMap seeds;
};

std::vector<SyntheticScene> gen_synthetic(std::uint64_t rng_seed, int count,
                                          const SyntheticParams& params = {});

}  // namespace seedloop
