#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "seedloop/error.hpp"
#include "seedloop/tensorio.hpp"

namespace seedloop {

namespace {

// Draws are derived from raw mt19937_64 output so scenes are identical across
// standard library implementations.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(uniform() * (hi - lo + 1)),
                                                         static_cast<std::uint64_t>(hi - lo)));
  }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class ShapeKind { Rectangle, Ellipse, Triangle };

struct Shape {
  ShapeKind kind;
  double cx, cy, ax, ay;  // center and half extents
  int x0, y0, x1, y1;     // inclusive bounding box

  bool contains(int x, int y) const {
    const double dx = x - cx, dy = y - cy;
    switch (kind) {
      case ShapeKind::Rectangle:
        return std::abs(dx) <= ax && std::abs(dy) <= ay;
      case ShapeKind::Ellipse:
        return (dx * dx) / (ax * ax) + (dy * dy) / (ay * ay) <= 1.0;
      case ShapeKind::Triangle: {
        // apex up, base at the bottom of the box
        const double t = (dy + ay) / (2.0 * ay);
        return t >= 0.0 && t <= 1.0 && std::abs(dx) <= ax * t;
      }
    }
    return false;
  }

  bool separated_from(const Shape& o, int gap) const {
    return x1 + gap < o.x0 || o.x1 + gap < x0 || y1 + gap < o.y0 || o.y1 + gap < y0;
  }
};

// Saturated base colors per foreground category; background stays in a muted band.
constexpr std::array<std::array<double, 3>, 8> kPalette = {{
    {220, 40, 40}, {40, 200, 60}, {50, 70, 230}, {230, 200, 40},
    {200, 50, 210}, {40, 210, 210}, {240, 130, 30}, {140, 60, 20},
}};

// Piecewise-constant colour offsets over a random Voronoi partition of the
// image; used to give both the background and the shapes part structure.
struct PatchField {
  std::vector<std::array<double, 2>> sites;
  std::vector<std::array<double, 3>> offsets;

  PatchField(SceneRng& rng, int n, int W, int H, double contrast) {
    for (int i = 0; i < n; ++i) {
      sites.push_back({rng.uniform(0, W), rng.uniform(0, H)});
      offsets.push_back({rng.uniform(-contrast, contrast), rng.uniform(-contrast, contrast),
                         rng.uniform(-contrast, contrast)});
    }
  }

  const std::array<double, 3>& at(int x, int y) const {
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const double dx = x - sites[i][0], dy = y - sites[i][1];
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return offsets[best];
  }
};

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

SyntheticScene make_scene(SceneRng& rng, const SyntheticParams& p) {
  const int W = p.width, H = p.height;
  SyntheticScene scene{RasterImage(W, H), LabelMap(W, H, 0), LabelMap(W, H, kIgnoreLabel)};

  std::vector<double> rgb(static_cast<std::size_t>(W) * H * 3);
  const std::array<double, 3> bg = {rng.uniform(90, 160), rng.uniform(90, 160), rng.uniform(90, 160)};
  // Two low-frequency gratings give the background large-scale texture.
  std::array<double, 2> freq{}, theta{}, amp{};
  for (int g = 0; g < 2; ++g) {
    freq[g] = rng.uniform(0.08, 0.25);
    theta[g] = rng.uniform(0.0, std::numbers::pi);
    amp[g] = p.texture_amplitude * rng.uniform(0.5, 1.0);
  }
  const PatchField bg_patches(rng, p.background_patches, W, H, p.patch_contrast);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double tex = 0.0;
      for (int g = 0; g < 2; ++g) tex += amp[g] * std::sin(freq[g] * (x * std::cos(theta[g]) + y * std::sin(theta[g])));
      const auto& patch = bg_patches.at(x, y);
      for (int c = 0; c < 3; ++c) rgb[3 * (static_cast<std::size_t>(y) * W + x) + c] = bg[c] + tex + patch[c];
    }

  std::vector<int> categories;
  for (int c = 1; c < p.n_categories; ++c) categories.push_back(c);
  for (int i = static_cast<int>(categories.size()) - 1; i > 0; --i)
    std::swap(categories[i], categories[rng.uniform_int(0, i)]);

  const int n_shapes = rng.uniform_int(1, std::min<int>(3, static_cast<int>(categories.size())));
  const int min_half = std::max(2, std::min(W, H) / 10);
  const int max_half = std::max(min_half, std::min(W, H) / 5);
  std::vector<Shape> shapes;
  std::vector<int> shape_category;
  for (int s = 0; s < n_shapes; ++s) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      Shape sh{};
      sh.kind = static_cast<ShapeKind>(rng.uniform_int(0, 2));
      sh.ax = rng.uniform_int(min_half, max_half);
      sh.ay = rng.uniform_int(min_half, max_half);
      const int margin_x = static_cast<int>(sh.ax) + p.ring_inset + p.ring_width + 1;
      const int margin_y = static_cast<int>(sh.ay) + p.ring_inset + p.ring_width + 1;
      if (2 * margin_x >= W || 2 * margin_y >= H) continue;
      sh.cx = rng.uniform_int(margin_x, W - 1 - margin_x);
      sh.cy = rng.uniform_int(margin_y, H - 1 - margin_y);
      sh.x0 = static_cast<int>(sh.cx - sh.ax);
      sh.x1 = static_cast<int>(sh.cx + sh.ax);
      sh.y0 = static_cast<int>(sh.cy - sh.ay);
      sh.y1 = static_cast<int>(sh.cy + sh.ay);
      const bool clear = std::all_of(shapes.begin(), shapes.end(),
                                     [&](const Shape& o) { return sh.separated_from(o, 3); });
      if (!clear) continue;
      shapes.push_back(sh);
      shape_category.push_back(categories[s]);
      break;
    }
  }

  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const Shape& sh = shapes[s];
    const int cat = shape_category[s];
    const auto& base = kPalette[(cat - 1) % kPalette.size()];
    std::array<double, 3> color{};
    for (int c = 0; c < 3; ++c) color[c] = base[c] + rng.uniform(-p.color_jitter, p.color_jitter);
    const double shade_dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double shade = p.shading / std::max(sh.ax, sh.ay);
    const PatchField parts(rng, p.shape_patches, W, H, p.patch_contrast);

    std::vector<std::pair<double, int>> members;  // (squared distance to centroid, pixel index)
    double sx = 0, sy = 0;
    for (int y = sh.y0; y <= sh.y1; ++y)
      for (int x = sh.x0; x <= sh.x1; ++x)
        if (sh.contains(x, y)) {
          const int idx = y * W + x;
          scene.gt.labels[idx] = static_cast<std::uint8_t>(cat);
          const double t = shade * ((x - sh.cx) * std::cos(shade_dir) + (y - sh.cy) * std::sin(shade_dir));
          const auto& part = parts.at(x, y);
          for (int c = 0; c < 3; ++c) rgb[3 * static_cast<std::size_t>(idx) + c] = color[c] + t + part[c];
          members.emplace_back(0.0, idx);
          sx += x;
          sy += y;
        }
    if (members.empty()) continue;
    const double mx = sx / members.size(), my = sy / members.size();
    for (auto& m : members) {
      const double dx = m.second % W - mx, dy = m.second / W - my;
      m.first = dx * dx + dy * dy;
    }
    std::sort(members.begin(), members.end());
    const auto n_seed = static_cast<std::size_t>(std::ceil(p.seed_fraction * members.size()));
    for (std::size_t i = 0; i < n_seed && i < members.size(); ++i)
      scene.seeds.labels[members[i].second] = static_cast<std::uint8_t>(cat);
  }

  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int d = std::min({x, y, W - 1 - x, H - 1 - y});
      const int idx = y * W + x;
      if (d >= p.ring_inset && d < p.ring_inset + p.ring_width && (x + y) % 2 == 0 && scene.gt.labels[idx] == 0)
        scene.seeds.labels[idx] = 0;
    }

  for (std::size_t i = 0; i < rgb.size(); ++i) scene.image.data[i] = to_u8(rgb[i] + p.noise_sigma * rng.normal());
  return scene;
}

}  // namespace

void SyntheticParams::validate() const {
  require(width >= 16 && height >= 16, ErrorCode::InvalidParams, "synthetic scenes need at least 16x16 pixels");
  require(n_categories >= 2 && n_categories <= 9, ErrorCode::InvalidParams, "n_categories must be in 2..9");
  require(noise_sigma >= 0 && color_jitter >= 0, ErrorCode::InvalidParams, "noise and jitter must be non-negative");
  require(seed_fraction > 0 && seed_fraction <= 1, ErrorCode::InvalidParams, "seed_fraction must be in (0,1]");
  require(ring_inset >= 0 && ring_width >= 1, ErrorCode::InvalidParams, "invalid background ring geometry");
}

std::vector<SyntheticScene> gen_synthetic(std::uint64_t rng_seed, int count, const SyntheticParams& params) {
  require(count >= 1, ErrorCode::InvalidParams, "count must be >= 1");
  params.validate();
  SceneRng rng(rng_seed);
  std::vector<SyntheticScene> scenes;
  scenes.reserve(count);
  for (int i = 0; i < count; ++i) scenes.push_back(make_scene(rng, params));
  return scenes;
}

}  // namespace seedloop
