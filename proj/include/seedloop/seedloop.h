#ifndef SEEDLOOP_SEEDLOOP_H
#define SEEDLOOP_SEEDLOOP_H

/*
 * C interface to the seedloop toolkit.
 *
 * Every object is an opaque handle created by a *_load / *_create / compute
 * call and released with the matching *_free (free functions accept NULL).
 * Every fallible call returns an sl_status; on failure a human-readable
 * message for the calling thread is available from sl_last_error().
 * Output handles are only written on success.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SEEDLOOP_BUILDING)
#define SEEDLOOP_API __declspec(dllexport)
#else
#define SEEDLOOP_API __declspec(dllimport)
#endif
#else
#define SEEDLOOP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status {
  SL_OK = 0,
  SL_ERR_INVALID_ARGUMENT = 1,
  SL_ERR_IO = 2,
  SL_ERR_MALFORMED_HEADER = 3,
  SL_ERR_TRUNCATED_PAYLOAD = 4,
  SL_ERR_UNSUPPORTED_MAXVAL = 5,
  SL_ERR_BAD_MAGIC = 6,
  SL_ERR_UNSUPPORTED_VERSION = 7,
  SL_ERR_DIM_OVERFLOW = 8,
  SL_ERR_NON_FINITE = 9,
  SL_ERR_INVALID_PARAMS = 10,
  SL_ERR_DIMENSION_MISMATCH = 11,
  SL_ERR_SHAPE_MISMATCH = 12,
  SL_ERR_W_OUT_OF_RANGE = 13,
  SL_ERR_NO_LABELED_REGIONS = 14,
  SL_ERR_UNLABELED_PREDICTION = 15,
  SL_ERR_LABEL_OUT_OF_RANGE = 16,
  SL_ERR_EMPTY_CONFUSION = 17,
  SL_ERR_EMPTY_SEEDS = 18,
  SL_ERR_MISSING_FILE = 19,
  SL_ERR_CONFIG = 20,
  SL_ERR_OUT_OF_MEMORY = 98,
  SL_ERR_INTERNAL = 99
} sl_status;

SEEDLOOP_API const char* sl_version(void);
SEEDLOOP_API const char* sl_status_name(sl_status status);
/* Message of the last failed call on this thread; "" if none. */
SEEDLOOP_API const char* sl_last_error(void);

typedef struct sl_image sl_image;       /* RGB raster */
typedef struct sl_labels sl_labels;     /* u8 label map, 255 = ignore */
typedef struct sl_spmap sl_spmap;       /* superpixel map */
typedef struct sl_features sl_features; /* standardized N x D feature matrix */
typedef struct sl_relmat sl_relmat;     /* similarity / adjacency / relationship matrices */
typedef struct sl_seeds sl_seeds;       /* C x N seed probabilities */
typedef struct sl_confusion sl_confusion;
typedef struct sl_config sl_config;     /* closed-loop configuration */
typedef struct sl_loop_result sl_loop_result;

/* ---- rasters ---- */
SEEDLOOP_API sl_status sl_image_create(int width, int height, const uint8_t* rgb, sl_image** out);
SEEDLOOP_API sl_status sl_image_load_ppm(const char* path, sl_image** out);
SEEDLOOP_API sl_status sl_image_save_ppm(const sl_image* image, const char* path);
SEEDLOOP_API sl_status sl_image_size(const sl_image* image, int* width, int* height);
SEEDLOOP_API void sl_image_free(sl_image* image);

SEEDLOOP_API sl_status sl_labels_create(int width, int height, const uint8_t* labels, sl_labels** out);
SEEDLOOP_API sl_status sl_labels_load_pgm(const char* path, sl_labels** out);
SEEDLOOP_API sl_status sl_labels_save_pgm(const sl_labels* labels, const char* path);
SEEDLOOP_API sl_status sl_labels_size(const sl_labels* labels, int* width, int* height);
/* Copies width*height labels into dst (capacity in bytes). */
SEEDLOOP_API sl_status sl_labels_copy(const sl_labels* labels, uint8_t* dst, size_t capacity);
SEEDLOOP_API void sl_labels_free(sl_labels* labels);

/* ---- synthetic data ---- */
typedef struct sl_synth_params {
  int width;
  int height;
  int n_categories;
  double noise_sigma;
  double seed_fraction;
} sl_synth_params;

SEEDLOOP_API void sl_synth_params_default(sl_synth_params* params);
/* Writes scene_NNN.ppm / .seeds.pgm / .gt.pgm; params may be NULL for defaults. */
SEEDLOOP_API sl_status sl_write_synthetic(uint64_t rng_seed, int count, const char* out_dir,
                                          const sl_synth_params* params);

/* ---- superpixels ---- */
typedef struct sl_seg_params {
  double k;
  double sigma;
  int min_size;
  double merge_thresh;
  int max_regions; /* 0 = no cap */
} sl_seg_params;

SEEDLOOP_API void sl_seg_params_default(sl_seg_params* params);
SEEDLOOP_API sl_status sl_superpixels_compute(const sl_image* image, const sl_seg_params* params, sl_spmap** out);
SEEDLOOP_API sl_status sl_spmap_load(const char* path, sl_spmap** out);
SEEDLOOP_API sl_status sl_spmap_save(const sl_spmap* spmap, const char* path);
SEEDLOOP_API sl_status sl_spmap_regions(const sl_spmap* spmap, size_t* n_regions);
SEEDLOOP_API void sl_spmap_free(sl_spmap* spmap);

/* ---- features ---- */
SEEDLOOP_API sl_status sl_features_compute(const sl_image* image, const sl_spmap* spmap, sl_features** out);
/* Loads an f32 [N,D] tensor; N must equal the region count of spmap. */
SEEDLOOP_API sl_status sl_features_load(const char* path, const sl_spmap* spmap, sl_features** out);
SEEDLOOP_API sl_status sl_features_save(const sl_features* features, const char* path);
SEEDLOOP_API sl_status sl_features_shape(const sl_features* features, size_t* n_regions, size_t* dims);
SEEDLOOP_API void sl_features_free(sl_features* features);

/* ---- relationship matrix ---- */
/* symmetrize: "none", "or" or "and". */
SEEDLOOP_API sl_status sl_relmat_build(const sl_features* features, const sl_spmap* spmap, int topk,
                                       const char* symmetrize, sl_relmat** out);
SEEDLOOP_API sl_status sl_relmat_load(const char* path, sl_relmat** out);
SEEDLOOP_API sl_status sl_relmat_save(const sl_relmat* rel, const char* path);
SEEDLOOP_API sl_status sl_relmat_size(const sl_relmat* rel, size_t* n_regions);
SEEDLOOP_API void sl_relmat_free(sl_relmat* rel);

/* ---- seeds ---- */
typedef struct sl_gate_params {
  double alpha_fg;
  double alpha_bg;
  double beta_fg;
  double beta_bg;
} sl_gate_params;

SEEDLOOP_API void sl_gate_params_default(sl_gate_params* params);
/* probs is row-major C x N. */
SEEDLOOP_API sl_status sl_seeds_create(size_t n_categories, size_t n_regions, const double* probs, sl_seeds** out);
SEEDLOOP_API sl_status sl_seeds_from_labels(const sl_labels* labels, const sl_spmap* spmap, size_t n_categories,
                                            sl_seeds** out);
SEEDLOOP_API sl_status sl_seeds_load(const char* path, sl_seeds** out);
SEEDLOOP_API sl_status sl_seeds_save(const sl_seeds* seeds, const char* path);
SEEDLOOP_API sl_status sl_seeds_shape(const sl_seeds* seeds, size_t* n_categories, size_t* n_regions);
/* Copies C*N probabilities (row-major) into dst; capacity counts doubles. */
SEEDLOOP_API sl_status sl_seeds_copy(const sl_seeds* seeds, double* dst, size_t capacity);
/* Customized random walk producing the mixed seed; strict != 0 skips the merge with the gated seeds. */
SEEDLOOP_API sl_status sl_walk(const sl_seeds* seeds, const sl_relmat* rel, const sl_seeds* netout,
                               const sl_gate_params* gates, int steps, int strict, sl_seeds** out);
SEEDLOOP_API sl_status sl_seed_update(const sl_seeds* seeds, const sl_seeds* netout, double w, sl_seeds** out);
SEEDLOOP_API void sl_seeds_free(sl_seeds* seeds);

/* ---- metrics ---- */
typedef struct sl_scores {
  double accu;
  double miou;
  double fiou;
} sl_scores;

SEEDLOOP_API sl_status sl_confusion_create(size_t n_classes, sl_confusion** out);
SEEDLOOP_API sl_status sl_confusion_add(sl_confusion* cm, const sl_labels* pred, const sl_labels* gt);
SEEDLOOP_API sl_status sl_confusion_total(const sl_confusion* cm, uint64_t* total);
SEEDLOOP_API sl_status sl_confusion_scores(const sl_confusion* cm, sl_scores* out);
SEEDLOOP_API void sl_confusion_free(sl_confusion* cm);
/* Writes "accu=%.4f mIoU=%.4f fIoU=%.4f" (NUL-terminated, truncated to capacity). */
SEEDLOOP_API sl_status sl_scores_format(const sl_scores* scores, char* dst, size_t capacity);

/* ---- closed loop ---- */
SEEDLOOP_API sl_status sl_config_default(sl_config** out);
SEEDLOOP_API sl_status sl_config_load(const char* path, sl_config** out);
SEEDLOOP_API sl_status sl_config_parse(const char* text, sl_config** out);
/* Sets one key as it would appear in a config file. */
SEEDLOOP_API sl_status sl_config_set(sl_config* cfg, const char* key, const char* value);
SEEDLOOP_API void sl_config_free(sl_config* cfg);

/* gt may be NULL. */
SEEDLOOP_API sl_status sl_loop_run(const sl_image* image, const sl_labels* seeds, const sl_labels* gt,
                                   const sl_config* cfg, sl_loop_result** out);
SEEDLOOP_API sl_status sl_loop_prediction(const sl_loop_result* result, sl_labels** out);
SEEDLOOP_API sl_status sl_loop_final_seeds(const sl_loop_result* result, sl_seeds** out);
SEEDLOOP_API sl_status sl_loop_epochs(const sl_loop_result* result, size_t* epochs);
/* Copies the trace text; *needed (if non-NULL) receives its length including the NUL. */
SEEDLOOP_API sl_status sl_loop_trace(const sl_loop_result* result, char* dst, size_t capacity, size_t* needed);
SEEDLOOP_API void sl_loop_result_free(sl_loop_result* result);

typedef struct sl_dataset_report {
  size_t n_images;
  size_t n_categories;
  sl_scores final_scores;
  sl_scores seed_scores; /* initial seeds rendered per superpixel, unlabelled regions as background */
} sl_dataset_report;

SEEDLOOP_API sl_status sl_run_dataset(const char* data_dir, const sl_config* cfg, const char* out_dir,
                                      sl_dataset_report* out);

#ifdef __cplusplus
}
#endif

#endif
