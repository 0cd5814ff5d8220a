#include "seedloop/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "seedloop/error.hpp"

namespace seedloop {

namespace {

void check_spmap(const SuperpixelMap& spmap, int width, int height) {
  require(spmap.width == width && spmap.height == height && spmap.region_of.size() == spmap.pixels(),
          ErrorCode::DimensionMismatch, "superpixel map does not match input dimensions");
}

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
}

}  // namespace

SeedState pixel_state_to_superpixels(const LabelMap& labels, const SuperpixelMap& spmap, std::size_t n_categories) {
  labels.validate();
  check_spmap(spmap, labels.width, labels.height);
  require(n_categories >= 1, ErrorCode::InvalidArgument, "need at least one category");
  const std::size_t N = spmap.n_regions;
  Dense<double> counts(n_categories, N, 0.0);
  std::vector<double> labelled(N, 0.0);
  for (std::size_t p = 0; p < labels.pixels(); ++p) {
    const auto l = labels.labels[p];
    if (l == kIgnoreLabel) continue;
    require(l < n_categories, ErrorCode::LabelOutOfRange, "seed label exceeds category count");
    const auto r = static_cast<std::size_t>(spmap.region_of[p]);
    counts(l, r) += 1.0;
    labelled[r] += 1.0;
  }
  for (std::size_t j = 0; j < N; ++j)
    if (labelled[j] > 0.0)
      for (std::size_t c = 0; c < n_categories; ++c) counts(c, j) /= labelled[j];
  return SeedState(std::move(counts));
}

SeedState pixel_state_to_superpixels(const Tensor& probs, const SuperpixelMap& spmap) {
  require(probs.dtype() == DType::F32 && probs.dims.size() == 3, ErrorCode::ShapeMismatch,
          "probability tensor must be f32 with dims [C,H,W]");
  check_spmap(spmap, static_cast<int>(probs.dims[2]), static_cast<int>(probs.dims[1]));
  const std::size_t C = probs.dims[0], N = spmap.n_regions, P = spmap.pixels();
  const auto& v = probs.values<float>();
  Dense<double> sums(C, N, 0.0);
  std::vector<double> count(N, 0.0);
  for (std::size_t p = 0; p < P; ++p) count[spmap.region_of[p]] += 1.0;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t p = 0; p < P; ++p) sums(c, spmap.region_of[p]) += v[c * P + p];
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t j = 0; j < N; ++j) sums(c, j) /= count[j];
  SeedState s(std::move(sums));
  s.validate();
  return s;
}

LabelMap seed_prediction(const SeedState& s, const SuperpixelMap& spmap) {
  LabelMap out = labels_from_state(s, spmap);
  for (auto& l : out.labels)
    if (l == kIgnoreLabel) l = 0;
  return out;
}

std::string LoopTrace::to_text() const {
  std::string out = "# epoch loss unchanged_fraction seed_miou updated stopped\n";
  for (const auto& r : epochs) {
    out += std::to_string(r.epoch) + " " + fmt_opt(r.loss) + " " + fmt_opt(r.unchanged_fraction) + " " +
           fmt_opt(r.seed_miou) + " " + (r.updated ? "1" : "0") + " " + (r.stopped ? "1" : "0") + "\n";
  }
  return out;
}

std::size_t infer_categories(std::initializer_list<const LabelMap*> maps) {
  int top = 1;
  for (const LabelMap* m : maps) {
    if (m == nullptr) continue;
    for (auto l : m->labels)
      if (l != kIgnoreLabel) top = std::max<int>(top, l);
  }
  return static_cast<std::size_t>(top) + 1;
}

LoopResult run_closed_loop(const RasterImage& image, const LabelMap& initial_seeds, const LoopConfig& cfg,
                           const LabelMap* gt, const SegmenterFactory& factory) {
  cfg.validate();
  image.validate();
  initial_seeds.validate();
  require(initial_seeds.width == image.width && initial_seeds.height == image.height, ErrorCode::DimensionMismatch,
          "seed map does not match image dimensions");
  if (gt != nullptr) {
    gt->validate();
    require(gt->width == image.width && gt->height == image.height, ErrorCode::DimensionMismatch,
            "ground truth does not match image dimensions");
  }
  require(std::any_of(initial_seeds.labels.begin(), initial_seeds.labels.end(),
                      [](std::uint8_t l) { return l != kIgnoreLabel; }),
          ErrorCode::EmptySeeds, "initial seeds contain no labelled pixel");

  const std::size_t C =
      cfg.n_categories > 0 ? static_cast<std::size_t>(cfg.n_categories) : infer_categories({&initial_seeds, gt});

  LoopResult result;
  result.spmap = compute_superpixels(image, cfg.seg);
  const FeatureMatrix features = superpixel_features(image, result.spmap);
  const RelationshipMatrix rel = build_relationship(features, result.spmap, cfg.topk, cfg.symmetrize);
  result.initial_seeds = pixel_state_to_superpixels(initial_seeds, result.spmap, C);

  std::unique_ptr<Segmenter> model =
      factory ? factory(features.dims(), C)
              : std::make_unique<LinearSegmenter>(features.dims(), C, cfg.learning_rate, cfg.l2);

  SeedState seeds = result.initial_seeds;
  for (int epoch = 1; epoch <= cfg.total_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    const SeedState nout = model->predict(features);
    const SeedState mixed = custom_walk(seeds, rel, nout, cfg.gates, cfg.walk_steps, cfg.strict_eq3);
    const bool any_mass =
        std::any_of(mixed.probs.data().begin(), mixed.probs.data().end(), [](double v) { return v > 0.0; });
    if (any_mass) rec.loss = model->train_epochs(features, mixed, cfg.steps_per_epoch);

    if (epoch >= cfg.update_start_epoch && (epoch - cfg.update_start_epoch) % cfg.update_every == 0) {
      SeedState next = seed_update(seeds, nout, cfg.w);
      const ConvergenceResult conv = convergence_check(seeds, next, cfg.conv);
      seeds = std::move(next);
      rec.updated = true;
      rec.unchanged_fraction = conv.unchanged_fraction;
      rec.stopped = conv.stopped;
    }
    if (gt != nullptr) rec.seed_miou = scores(confusion(seed_prediction(seeds, result.spmap), *gt, C)).miou;
    result.trace.epochs.push_back(rec);
    if (rec.stopped) break;
  }

  result.final_seeds = std::move(seeds);
  result.final_pred = labels_from_state(model->predict(features), result.spmap);
  return result;
}

DatasetReport run_dataset(const std::filesystem::path& dir_in, const LoopConfig& cfg,
                          const std::filesystem::path& dir_out) {
  namespace fs = std::filesystem;
  cfg.validate();
  if (!fs::is_directory(dir_in)) fail(ErrorCode::MissingFile, "not a directory: " + dir_in.string());

  std::set<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_in))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") ids.insert(entry.path().stem().string());
  if (ids.empty()) fail(ErrorCode::MissingFile, "no <id>.ppm images in " + dir_in.string());

  struct Item {
    std::string id;
    RasterImage image;
    LabelMap seeds, gt;
  };
  std::vector<Item> items;
  for (const auto& id : ids) {
    const fs::path seeds = dir_in / (id + ".seeds.pgm"), gt = dir_in / (id + ".gt.pgm");
    if (!fs::exists(seeds)) fail(ErrorCode::MissingFile, "missing " + seeds.string());
    if (!fs::exists(gt)) fail(ErrorCode::MissingFile, "missing " + gt.string());
    items.push_back({id, load_ppm(dir_in / (id + ".ppm")), load_label_pgm(seeds), load_label_pgm(gt)});
  }

  LoopConfig run_cfg = cfg;
  if (run_cfg.n_categories == 0) {
    std::size_t c = 2;
    for (const auto& it : items) c = std::max(c, infer_categories({&it.seeds, &it.gt}));
    run_cfg.n_categories = static_cast<int>(c);
  }
  const auto C = static_cast<std::size_t>(run_cfg.n_categories);

  fs::create_directories(dir_out);
  DatasetReport report;
  report.n_categories = C;
  report.final_confusion = ConfusionMatrix(C);
  report.seed_confusion = ConfusionMatrix(C);
  for (const auto& it : items) {
    const LoopResult r = run_closed_loop(it.image, it.seeds, run_cfg, &it.gt);
    save_label_pgm(r.final_pred, dir_out / (it.id + ".pred.pgm"));
    write_text(dir_out / (it.id + ".trace.txt"), r.trace.to_text());
    const ConfusionMatrix fc = confusion(r.final_pred, it.gt, C);
    const ConfusionMatrix sc = confusion(seed_prediction(r.initial_seeds, r.spmap), it.gt, C);
    report.final_confusion += fc;
    report.seed_confusion += sc;
    report.images.push_back({it.id, scores(fc), scores(sc), r.trace.epochs.size()});
  }
  report.final_scores = scores(report.final_confusion);
  report.seed_scores = scores(report.seed_confusion);
  return report;
}

void write_synthetic_dataset(std::uint64_t rng_seed, int count, const std::filesystem::path& dir_out,
                             const SyntheticParams& params) {
  const auto scenes = gen_synthetic(rng_seed, count, params);
  std::filesystem::create_directories(dir_out);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "scene_%03zu", i);
    save_ppm(scenes[i].image, dir_out / (std::string(id) + ".ppm"));
    save_label_pgm(scenes[i].seeds, dir_out / (std::string(id) + ".seeds.pgm"));
    save_label_pgm(scenes[i].gt, dir_out / (std::string(id) + ".gt.pgm"));
  }
}

}  // namespace seedloop
