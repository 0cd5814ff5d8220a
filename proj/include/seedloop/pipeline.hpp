#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seedloop/features.hpp"
#include "seedloop/metrics.hpp"
#include "seedloop/relgraph.hpp"
#include "seedloop/seeds.hpp"
#include "seedloop/segmenter.hpp"
#include "seedloop/superpixel.hpp"
#include "seedloop/tensorio.hpp"

namespace seedloop {

/// Hyperparameters of the closed loop. Defaults follow the published setup:
/// w = 0.2, two walk steps, 20 epochs, seed updates every 3 epochs from epoch
/// 10 on, gates 0.90/0.90/0.75/0.90, convergence at 95% of superpixels moving
/// less than 0.1 in L1.
struct LoopConfig {
  GateParams gates;
  double w = 0.2;
  int walk_steps = 2;
  int total_epochs = 20;
  int update_start_epoch = 10;
  int update_every = 3;
  int epochs_per_phase = 3;
  int steps_per_epoch = 50;  // full-batch descent steps of the toy segmenter per loop epoch
  ConvergenceParams conv;
  SegParams seg;
  double learning_rate = 1.0;
  double l2 = 1e-3;
  std::uint64_t rng_seed = 0;
  int topk = 10;
  Symmetrize symmetrize = Symmetrize::None;
  bool strict_eq3 = false;
  int n_categories = 0;  // 0 = infer from the labels

  void validate() const;
};

/// Parses `key = value` lines; '#' starts a comment; unknown keys are errors.
LoopConfig parse_config(const std::string& text);
/// Applies one `key = value` assignment without validating the whole config.
void set_config_value(LoopConfig& cfg, const std::string& key, const std::string& value);
LoopConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const LoopConfig& cfg);

/// Per-region fraction of the region's labelled pixels carrying each
/// category; regions without labelled pixels get a zero column.
SeedState pixel_state_to_superpixels(const LabelMap& labels, const SuperpixelMap& spmap, std::size_t n_categories);
/// Per-region mean of a probability tensor with dims [C,H,W].
SeedState pixel_state_to_superpixels(const Tensor& probs, const SuperpixelMap& spmap);

/// Dense rendering of a seed state: argmax per region, unlabelled regions as background.
LabelMap seed_prediction(const SeedState& s, const SuperpixelMap& spmap);

struct EpochRecord {
  int epoch = 0;
  std::optional<double> loss;                // absent when no superpixel passed the gates
  std::optional<double> unchanged_fraction;  // present on seed-update epochs
  std::optional<double> seed_miou;           // dynamic seeds vs gt, when gt is given
  bool updated = false;
  bool stopped = false;
};

struct LoopTrace {
  std::vector<EpochRecord> epochs;

  std::string to_text() const;
};

struct LoopResult {
  SuperpixelMap spmap;
  SeedState initial_seeds;
  SeedState final_seeds;
  LabelMap final_pred;
  LoopTrace trace;
};

using SegmenterFactory = std::function<std::unique_ptr<Segmenter>(std::size_t dims, std::size_t n_categories)>;

/// Largest non-ignore label + 1 over the given maps (at least 2).
std::size_t infer_categories(std::initializer_list<const LabelMap*> maps);

LoopResult run_closed_loop(const RasterImage& image, const LabelMap& initial_seeds, const LoopConfig& cfg,
                           const LabelMap* gt = nullptr, const SegmenterFactory& factory = {});

struct ImageReport {
  std::string id;
  Scores final_scores;
  Scores seed_scores;
  std::size_t epochs_run;
};

struct DatasetReport {
  std::size_t n_categories = 0;
  ConfusionMatrix final_confusion;
  ConfusionMatrix seed_confusion;
  Scores final_scores{};
  Scores seed_scores{};
  std::vector<ImageReport> images;
};

/// Runs the loop on every `<id>.ppm` in dir_in (with `<id>.seeds.pgm` and
/// `<id>.gt.pgm`), writing `<id>.pred.pgm` and `<id>.trace.txt` to dir_out.
DatasetReport run_dataset(const std::filesystem::path& dir_in, const LoopConfig& cfg,
                          const std::filesystem::path& dir_out);

/// Writes `<prefix>_NNN.ppm/.seeds.pgm/.gt.pgm` for each generated scene.
void write_synthetic_dataset(std::uint64_t rng_seed, int count, const std::filesystem::path& dir_out,
                             const SyntheticParams& params = {});

}  // namespace seedloop
