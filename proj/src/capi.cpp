#include "seedloop/seedloop.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "seedloop/error.hpp"
#include "seedloop/pipeline.hpp"

struct sl_image {
  seedloop::RasterImage v;
};
struct sl_labels {
  seedloop::LabelMap v;
};
struct sl_spmap {
  seedloop::SuperpixelMap v;
};
struct sl_features {
  seedloop::FeatureMatrix v;
};
struct sl_relmat {
  seedloop::RelationshipMatrix v;
};
struct sl_seeds {
  seedloop::SeedState v;
};
struct sl_confusion {
  seedloop::ConfusionMatrix v;
};
struct sl_config {
  seedloop::LoopConfig v;
};
struct sl_loop_result {
  seedloop::LoopResult v;
  std::string trace;
};

namespace {

thread_local std::string g_last_error;

sl_status set_error(sl_status status, const char* what) {
  g_last_error = what;
  return status;
}

static_assert(SL_ERR_INVALID_ARGUMENT == static_cast<int>(seedloop::ErrorCode::InvalidArgument));
static_assert(SL_ERR_SHAPE_MISMATCH == static_cast<int>(seedloop::ErrorCode::ShapeMismatch));
static_assert(SL_ERR_CONFIG == static_cast<int>(seedloop::ErrorCode::ConfigError));

sl_status map_code(seedloop::ErrorCode code) {
  return static_cast<sl_status>(static_cast<int>(code));
}

template <class F>
sl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SL_OK;
  } catch (const seedloop::Error& e) {
    return set_error(map_code(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(SL_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SL_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(SL_ERR_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) seedloop::fail(seedloop::ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

template <class Handle, class Value>
void emit(Handle** out, Value&& value) {
  *out = new Handle{std::forward<Value>(value)};
}

seedloop::SegParams to_core(const sl_seg_params& p) {
  seedloop::SegParams s;
  s.k = p.k;
  s.sigma = p.sigma;
  s.min_size = p.min_size;
  s.merge_thresh = p.merge_thresh;
  s.max_regions = p.max_regions;
  return s;
}

seedloop::GateParams to_core(const sl_gate_params& p) {
  return {p.alpha_fg, p.alpha_bg, p.beta_fg, p.beta_bg};
}

sl_scores to_c(const seedloop::Scores& s) { return {s.accu, s.miou, s.fiou}; }

}  // namespace

extern "C" {

const char* sl_version(void) { return "1.0.0"; }

const char* sl_status_name(sl_status status) {
  switch (status) {
    case SL_OK: return "Ok";
    case SL_ERR_OUT_OF_MEMORY: return "OutOfMemory";
    case SL_ERR_INTERNAL: return "Internal";
    default:
      if (status >= SL_ERR_INVALID_ARGUMENT && status <= SL_ERR_CONFIG)
        return seedloop::to_string(static_cast<seedloop::ErrorCode>(status));
      return "Unknown";
  }
}

const char* sl_last_error(void) { return g_last_error.c_str(); }

sl_status sl_image_create(int width, int height, const uint8_t* rgb, sl_image** out) {
  return guarded([&] {
    need(rgb, "rgb");
    need(out, "out");
    seedloop::RasterImage img(width, height);
    std::copy_n(rgb, img.data.size(), img.data.begin());
    emit(out, std::move(img));
  });
}

sl_status sl_image_load_ppm(const char* path, sl_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, seedloop::load_ppm(path));
  });
}

sl_status sl_image_save_ppm(const sl_image* image, const char* path) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    seedloop::save_ppm(image->v, path);
  });
}

sl_status sl_image_size(const sl_image* image, int* width, int* height) {
  return guarded([&] {
    need(image, "image");
    if (width) *width = image->v.width;
    if (height) *height = image->v.height;
  });
}

void sl_image_free(sl_image* image) { delete image; }

sl_status sl_labels_create(int width, int height, const uint8_t* labels, sl_labels** out) {
  return guarded([&] {
    need(labels, "labels");
    need(out, "out");
    seedloop::LabelMap m(width, height);
    std::copy_n(labels, m.labels.size(), m.labels.begin());
    emit(out, std::move(m));
  });
}

sl_status sl_labels_load_pgm(const char* path, sl_labels** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, seedloop::load_label_pgm(path));
  });
}

sl_status sl_labels_save_pgm(const sl_labels* labels, const char* path) {
  return guarded([&] {
    need(labels, "labels");
    need(path, "path");
    seedloop::save_label_pgm(labels->v, path);
  });
}

sl_status sl_labels_size(const sl_labels* labels, int* width, int* height) {
  return guarded([&] {
    need(labels, "labels");
    if (width) *width = labels->v.width;
    if (height) *height = labels->v.height;
  });
}

sl_status sl_labels_copy(const sl_labels* labels, uint8_t* dst, size_t capacity) {
  return guarded([&] {
    need(labels, "labels");
    need(dst, "dst");
    seedloop::require(capacity >= labels->v.labels.size(), seedloop::ErrorCode::InvalidArgument,
                      "destination buffer too small");
    std::copy(labels->v.labels.begin(), labels->v.labels.end(), dst);
  });
}

void sl_labels_free(sl_labels* labels) { delete labels; }

void sl_synth_params_default(sl_synth_params* params) {
  if (params == nullptr) return;
  const seedloop::SyntheticParams d;
  *params = {d.width, d.height, d.n_categories, d.noise_sigma, d.seed_fraction};
}

sl_status sl_write_synthetic(uint64_t rng_seed, int count, const char* out_dir, const sl_synth_params* params) {
  return guarded([&] {
    need(out_dir, "out_dir");
    seedloop::SyntheticParams p;
    if (params != nullptr) {
      p.width = params->width;
      p.height = params->height;
      p.n_categories = params->n_categories;
      p.noise_sigma = params->noise_sigma;
      p.seed_fraction = params->seed_fraction;
    }
    seedloop::write_synthetic_dataset(rng_seed, count, out_dir, p);
  });
}

void sl_seg_params_default(sl_seg_params* params) {
  if (params == nullptr) return;
  const seedloop::SegParams d;
  *params = {d.k, d.sigma, d.min_size, d.merge_thresh, d.max_regions};
}

sl_status sl_superpixels_compute(const sl_image* image, const sl_seg_params* params, sl_spmap** out) {
  return guarded([&] {
    need(image, "image");
    need(out, "out");
    sl_seg_params p;
    sl_seg_params_default(&p);
    if (params != nullptr) p = *params;
    emit(out, seedloop::compute_superpixels(image->v, to_core(p)));
  });
}

sl_status sl_spmap_load(const char* path, sl_spmap** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, seedloop::superpixels_from_tensor(seedloop::load_tensor(path)));
  });
}

sl_status sl_spmap_save(const sl_spmap* spmap, const char* path) {
  return guarded([&] {
    need(spmap, "spmap");
    need(path, "path");
    seedloop::save_tensor(seedloop::superpixels_to_tensor(spmap->v), path);
  });
}

sl_status sl_spmap_regions(const sl_spmap* spmap, size_t* n_regions) {
  return guarded([&] {
    need(spmap, "spmap");
    need(n_regions, "n_regions");
    *n_regions = spmap->v.n_regions;
  });
}

void sl_spmap_free(sl_spmap* spmap) { delete spmap; }

sl_status sl_features_compute(const sl_image* image, const sl_spmap* spmap, sl_features** out) {
  return guarded([&] {
    need(image, "image");
    need(spmap, "spmap");
    need(out, "out");
    emit(out, seedloop::superpixel_features(image->v, spmap->v));
  });
}

sl_status sl_features_load(const char* path, const sl_spmap* spmap, sl_features** out) {
  return guarded([&] {
    need(path, "path");
    need(spmap, "spmap");
    need(out, "out");
    emit(out, seedloop::load_external_features(path, spmap->v.n_regions));
  });
}

sl_status sl_features_save(const sl_features* features, const char* path) {
  return guarded([&] {
    need(features, "features");
    need(path, "path");
    seedloop::save_tensor(seedloop::features_to_tensor(features->v), path);
  });
}

sl_status sl_features_shape(const sl_features* features, size_t* n_regions, size_t* dims) {
  return guarded([&] {
    need(features, "features");
    if (n_regions) *n_regions = features->v.n_regions();
    if (dims) *dims = features->v.dims();
  });
}

void sl_features_free(sl_features* features) { delete features; }

sl_status sl_relmat_build(const sl_features* features, const sl_spmap* spmap, int topk, const char* symmetrize,
                          sl_relmat** out) {
  return guarded([&] {
    need(features, "features");
    need(spmap, "spmap");
    need(out, "out");
    const auto sym = seedloop::parse_symmetrize(symmetrize ? symmetrize : "none");
    emit(out, seedloop::build_relationship(features->v, spmap->v, topk, sym));
  });
}

sl_status sl_relmat_load(const char* path, sl_relmat** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, seedloop::relationship_from_tensor(seedloop::load_tensor(path)));
  });
}

sl_status sl_relmat_save(const sl_relmat* rel, const char* path) {
  return guarded([&] {
    need(rel, "rel");
    need(path, "path");
    seedloop::save_tensor(seedloop::relationship_to_tensor(rel->v), path);
  });
}

sl_status sl_relmat_size(const sl_relmat* rel, size_t* n_regions) {
  return guarded([&] {
    need(rel, "rel");
    need(n_regions, "n_regions");
    *n_regions = rel->v.size();
  });
}

void sl_relmat_free(sl_relmat* rel) { delete rel; }

void sl_gate_params_default(sl_gate_params* params) {
  if (params == nullptr) return;
  const seedloop::GateParams d;
  *params = {d.alpha_fg, d.alpha_bg, d.beta_fg, d.beta_bg};
}

sl_status sl_seeds_create(size_t n_categories, size_t n_regions, const double* probs, sl_seeds** out) {
  return guarded([&] {
    need(probs, "probs");
    need(out, "out");
    seedloop::SeedState s(n_categories, n_regions);
    std::copy_n(probs, n_categories * n_regions, s.probs.data().begin());
    s.validate();
    emit(out, std::move(s));
  });
}

sl_status sl_seeds_from_labels(const sl_labels* labels, const sl_spmap* spmap, size_t n_categories,
                               sl_seeds** out) {
  return guarded([&] {
    need(labels, "labels");
    need(spmap, "spmap");
    need(out, "out");
    emit(out, seedloop::pixel_state_to_superpixels(labels->v, spmap->v, n_categories));
  });
}

sl_status sl_seeds_load(const char* path, sl_seeds** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, seedloop::seeds_from_tensor(seedloop::load_tensor(path)));
  });
}

sl_status sl_seeds_save(const sl_seeds* seeds, const char* path) {
  return guarded([&] {
    need(seeds, "seeds");
    need(path, "path");
    seedloop::save_tensor(seedloop::seeds_to_tensor(seeds->v), path);
  });
}

sl_status sl_seeds_shape(const sl_seeds* seeds, size_t* n_categories, size_t* n_regions) {
  return guarded([&] {
    need(seeds, "seeds");
    if (n_categories) *n_categories = seeds->v.n_categories();
    if (n_regions) *n_regions = seeds->v.n_regions();
  });
}

sl_status sl_seeds_copy(const sl_seeds* seeds, double* dst, size_t capacity) {
  return guarded([&] {
    need(seeds, "seeds");
    need(dst, "dst");
    const auto& d = seeds->v.probs.data();
    seedloop::require(capacity >= d.size(), seedloop::ErrorCode::InvalidArgument, "destination buffer too small");
    std::copy(d.begin(), d.end(), dst);
  });
}

sl_status sl_walk(const sl_seeds* seeds, const sl_relmat* rel, const sl_seeds* netout, const sl_gate_params* gates,
                  int steps, int strict, sl_seeds** out) {
  return guarded([&] {
    need(seeds, "seeds");
    need(rel, "rel");
    need(netout, "netout");
    need(out, "out");
    sl_gate_params g;
    sl_gate_params_default(&g);
    if (gates != nullptr) g = *gates;
    emit(out, seedloop::custom_walk(seeds->v, rel->v, netout->v, to_core(g), steps, strict != 0));
  });
}

sl_status sl_seed_update(const sl_seeds* seeds, const sl_seeds* netout, double w, sl_seeds** out) {
  return guarded([&] {
    need(seeds, "seeds");
    need(netout, "netout");
    need(out, "out");
    emit(out, seedloop::seed_update(seeds->v, netout->v, w));
  });
}

void sl_seeds_free(sl_seeds* seeds) { delete seeds; }

sl_status sl_confusion_create(size_t n_classes, sl_confusion** out) {
  return guarded([&] {
    need(out, "out");
    seedloop::require(n_classes >= 1 && n_classes < seedloop::kIgnoreLabel, seedloop::ErrorCode::InvalidArgument,
                      "n_classes must be in 1..254");
    emit(out, seedloop::ConfusionMatrix(n_classes));
  });
}

sl_status sl_confusion_add(sl_confusion* cm, const sl_labels* pred, const sl_labels* gt) {
  return guarded([&] {
    need(cm, "cm");
    need(pred, "pred");
    need(gt, "gt");
    cm->v += seedloop::confusion(pred->v, gt->v, cm->v.n_classes());
  });
}

sl_status sl_confusion_total(const sl_confusion* cm, uint64_t* total) {
  return guarded([&] {
    need(cm, "cm");
    need(total, "total");
    *total = cm->v.total();
  });
}

sl_status sl_confusion_scores(const sl_confusion* cm, sl_scores* out) {
  return guarded([&] {
    need(cm, "cm");
    need(out, "out");
    *out = to_c(seedloop::scores(cm->v));
  });
}

void sl_confusion_free(sl_confusion* cm) { delete cm; }

sl_status sl_scores_format(const sl_scores* scores, char* dst, size_t capacity) {
  return guarded([&] {
    need(scores, "scores");
    need(dst, "dst");
    seedloop::require(capacity >= 1, seedloop::ErrorCode::InvalidArgument, "destination buffer too small");
    const std::string text = seedloop::format_scores({scores->accu, scores->miou, scores->fiou});
    const std::size_t n = std::min(text.size(), capacity - 1);
    std::memcpy(dst, text.data(), n);
    dst[n] = '\0';
  });
}

sl_status sl_config_default(sl_config** out) {
  return guarded([&] {
    need(out, "out");
    emit(out, seedloop::LoopConfig{});
  });
}

sl_status sl_config_load(const char* path, sl_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    emit(out, seedloop::load_config(path));
  });
}

sl_status sl_config_parse(const char* text, sl_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    emit(out, seedloop::parse_config(text));
  });
}

sl_status sl_config_set(sl_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    seedloop::LoopConfig next = cfg->v;
    seedloop::set_config_value(next, key, value);
    next.validate();
    cfg->v = next;
  });
}

void sl_config_free(sl_config* cfg) { delete cfg; }

sl_status sl_loop_run(const sl_image* image, const sl_labels* seeds, const sl_labels* gt, const sl_config* cfg,
                      sl_loop_result** out) {
  return guarded([&] {
    need(image, "image");
    need(seeds, "seeds");
    need(cfg, "cfg");
    need(out, "out");
    seedloop::LoopResult r = seedloop::run_closed_loop(image->v, seeds->v, cfg->v, gt ? &gt->v : nullptr);
    std::string trace = r.trace.to_text();
    *out = new sl_loop_result{std::move(r), std::move(trace)};
  });
}

sl_status sl_loop_prediction(const sl_loop_result* result, sl_labels** out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    emit(out, result->v.final_pred);
  });
}

sl_status sl_loop_final_seeds(const sl_loop_result* result, sl_seeds** out) {
  return guarded([&] {
    need(result, "result");
    need(out, "out");
    emit(out, result->v.final_seeds);
  });
}

sl_status sl_loop_epochs(const sl_loop_result* result, size_t* epochs) {
  return guarded([&] {
    need(result, "result");
    need(epochs, "epochs");
    *epochs = result->v.trace.epochs.size();
  });
}

sl_status sl_loop_trace(const sl_loop_result* result, char* dst, size_t capacity, size_t* needed) {
  return guarded([&] {
    need(result, "result");
    if (needed) *needed = result->trace.size() + 1;
    if (dst == nullptr || capacity == 0) return;
    const std::size_t n = std::min(result->trace.size(), capacity - 1);
    std::memcpy(dst, result->trace.data(), n);
    dst[n] = '\0';
  });
}

void sl_loop_result_free(sl_loop_result* result) { delete result; }

sl_status sl_run_dataset(const char* data_dir, const sl_config* cfg, const char* out_dir, sl_dataset_report* out) {
  return guarded([&] {
    need(data_dir, "data_dir");
    need(cfg, "cfg");
    need(out_dir, "out_dir");
    need(out, "out");
    const seedloop::DatasetReport r = seedloop::run_dataset(data_dir, cfg->v, out_dir);
    *out = {r.images.size(), r.n_categories, to_c(r.final_scores), to_c(r.seed_scores)};
  });
}

}  // extern "C"
