// Exercises the shared library through its C interface only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seedloop/seedloop.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("seedloop_capi_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

sl_image* two_tone(int w, int h) {
  std::vector<uint8_t> rgb(static_cast<std::size_t>(w) * h * 3, 0);
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x)
      for (int c = 0; c < 3; ++c) rgb[3 * (static_cast<std::size_t>(y) * w + x) + c] = 255;
  sl_image* img = nullptr;
  REQUIRE(sl_image_create(w, h, rgb.data(), &img) == SL_OK);
  return img;
}

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("status names and version") {
    CHECK(std::string(sl_version()).size() > 0);
    CHECK(std::string(sl_status_name(SL_OK)) == "Ok");
    CHECK(std::string(sl_status_name(SL_ERR_BAD_MAGIC)) == "BadMagic");
    CHECK(std::string(sl_status_name(SL_ERR_CONFIG)) == "ConfigError");
  }

  TEST_CASE("null arguments are rejected with a message") {
    sl_image* img = nullptr;
    CHECK(sl_image_create(2, 2, nullptr, &img) == SL_ERR_INVALID_ARGUMENT);
    CHECK(img == nullptr);
    CHECK(std::strlen(sl_last_error()) > 0);
    CHECK(sl_image_load_ppm(nullptr, &img) == SL_ERR_INVALID_ARGUMENT);
    sl_image_free(nullptr);  // no-op
  }

  TEST_CASE("core error codes pass through") {
    Scratch s;
    sl_image* img = nullptr;
    CHECK(sl_image_load_ppm((s / "missing.ppm").c_str(), &img) == SL_ERR_IO);
    sl_config* cfg = nullptr;
    CHECK(sl_config_parse("nope = 1\n", &cfg) == SL_ERR_CONFIG);
    CHECK(std::string(sl_last_error()).find("nope") != std::string::npos);
    CHECK(sl_config_parse("w = 3\n", &cfg) == SL_ERR_W_OUT_OF_RANGE);
    REQUIRE(sl_config_default(&cfg) == SL_OK);
    CHECK(sl_config_set(cfg, "walk_steps", "0") == SL_ERR_INVALID_PARAMS);
    CHECK(sl_config_set(cfg, "walk_steps", "3") == SL_OK);
    sl_config_free(cfg);

    sl_seeds* a = nullptr;
    sl_seeds* b = nullptr;
    sl_seeds* out = nullptr;
    const double pa[4] = {0.5, 0.2, 0.5, 0.8};
    const double pb[2] = {0.9, 0.1};
    REQUIRE(sl_seeds_create(2, 2, pa, &a) == SL_OK);
    REQUIRE(sl_seeds_create(2, 1, pb, &b) == SL_OK);
    CHECK(sl_seed_update(a, b, 0.2, &out) == SL_ERR_SHAPE_MISMATCH);
    CHECK(sl_seed_update(a, a, 2.0, &out) == SL_ERR_W_OUT_OF_RANGE);
    const double bad[2] = {0.9, 0.9};
    sl_seeds* c = nullptr;
    CHECK(sl_seeds_create(2, 1, bad, &c) == SL_ERR_INVALID_ARGUMENT);
    sl_seeds_free(a);
    sl_seeds_free(b);
  }

  TEST_CASE("seed update arithmetic through the handle") {
    const double old_p[2] = {0.5, 0.5};
    const double net_p[2] = {0.9, 0.1};
    sl_seeds* s_old = nullptr;
    sl_seeds* s_net = nullptr;
    sl_seeds* s_new = nullptr;
    REQUIRE(sl_seeds_create(2, 1, old_p, &s_old) == SL_OK);
    REQUIRE(sl_seeds_create(2, 1, net_p, &s_net) == SL_OK);
    REQUIRE(sl_seed_update(s_old, s_net, 0.2, &s_new) == SL_OK);
    double got[2];
    CHECK(sl_seeds_copy(s_new, got, 1) != SL_OK);
    REQUIRE(sl_seeds_copy(s_new, got, 2) == SL_OK);
    CHECK(got[0] == doctest::Approx(0.58));
    CHECK(got[1] == doctest::Approx(0.42));
    sl_seeds_free(s_old);
    sl_seeds_free(s_net);
    sl_seeds_free(s_new);
  }

  TEST_CASE("superpixels, features, relationship and walk end to end") {
    Scratch s;
    sl_image* img = two_tone(32, 32);
    sl_seg_params sp;
    sl_seg_params_default(&sp);
    sp.k = 100;
    sp.sigma = 0;
    sp.min_size = 1;
    sp.merge_thresh = 0;
    sl_spmap* map = nullptr;
    REQUIRE(sl_superpixels_compute(img, &sp, &map) == SL_OK);
    size_t n = 0;
    REQUIRE(sl_spmap_regions(map, &n) == SL_OK);
    CHECK(n == 2);
    REQUIRE(sl_spmap_save(map, (s / "sp.dfnt").c_str()) == SL_OK);
    sl_spmap* map2 = nullptr;
    REQUIRE(sl_spmap_load((s / "sp.dfnt").c_str(), &map2) == SL_OK);

    sl_features* f = nullptr;
    REQUIRE(sl_features_compute(img, map2, &f) == SL_OK);
    size_t rows = 0, dims = 0;
    REQUIRE(sl_features_shape(f, &rows, &dims) == SL_OK);
    CHECK(rows == 2);
    CHECK(dims == 15);

    sl_relmat* rel = nullptr;
    CHECK(sl_relmat_build(f, map2, 10, "sideways", &rel) == SL_ERR_INVALID_PARAMS);
    REQUIRE(sl_relmat_build(f, map2, 10, "none", &rel) == SL_OK);
    REQUIRE(sl_relmat_save(rel, (s / "rel.dfnt").c_str()) == SL_OK);
    sl_relmat* rel2 = nullptr;
    REQUIRE(sl_relmat_load((s / "rel.dfnt").c_str(), &rel2) == SL_OK);
    size_t rn = 0;
    REQUIRE(sl_relmat_size(rel2, &rn) == SL_OK);
    CHECK(rn == 2);

    // Seed only the left region as background; the network is confident everywhere.
    const double seeds_p[4] = {1.0, 0.0, 0.0, 0.0};
    const double net_p[4] = {0.95, 0.95, 0.05, 0.05};
    sl_seeds* seeds = nullptr;
    sl_seeds* net = nullptr;
    sl_seeds* mixed = nullptr;
    REQUIRE(sl_seeds_create(2, 2, seeds_p, &seeds) == SL_OK);
    REQUIRE(sl_seeds_create(2, 2, net_p, &net) == SL_OK);
    sl_gate_params g;
    sl_gate_params_default(&g);
    CHECK(g.beta_fg == 0.75);
    REQUIRE(sl_walk(seeds, rel2, net, &g, 2, 0, &mixed) == SL_OK);
    double out[4];
    REQUIRE(sl_seeds_copy(mixed, out, 4) == SL_OK);
    CHECK(out[0] == 1.0);
    CHECK(out[1] > 0.0);  // expanded to the adjacent region
    CHECK(out[2] == 0.0);
    REQUIRE(sl_seeds_save(mixed, (s / "mixed.dfnt").c_str()) == SL_OK);
    sl_seeds* back = nullptr;
    REQUIRE(sl_seeds_load((s / "mixed.dfnt").c_str(), &back) == SL_OK);
    size_t C = 0, N = 0;
    REQUIRE(sl_seeds_shape(back, &C, &N) == SL_OK);
    CHECK(C == 2);
    CHECK(N == 2);

    for (auto* p : {seeds, net, mixed, back}) sl_seeds_free(p);
    sl_relmat_free(rel);
    sl_relmat_free(rel2);
    sl_features_free(f);
    sl_spmap_free(map);
    sl_spmap_free(map2);
    sl_image_free(img);
  }

  TEST_CASE("metrics through the handle") {
    const uint8_t gt[8] = {0, 0, 0, 1, 1, 1, 0, 1};
    const uint8_t pr[8] = {0, 0, 0, 1, 1, 1, 1, 0};
    sl_labels* g = nullptr;
    sl_labels* p = nullptr;
    REQUIRE(sl_labels_create(4, 2, gt, &g) == SL_OK);
    REQUIRE(sl_labels_create(4, 2, pr, &p) == SL_OK);
    sl_confusion* cm = nullptr;
    REQUIRE(sl_confusion_create(2, &cm) == SL_OK);
    sl_scores sc;
    CHECK(sl_confusion_scores(cm, &sc) == SL_ERR_EMPTY_CONFUSION);
    REQUIRE(sl_confusion_add(cm, p, g) == SL_OK);
    uint64_t total = 0;
    REQUIRE(sl_confusion_total(cm, &total) == SL_OK);
    CHECK(total == 8);
    REQUIRE(sl_confusion_scores(cm, &sc) == SL_OK);
    CHECK(sc.accu == doctest::Approx(0.75));
    CHECK(sc.miou == doctest::Approx(0.6));
    char buf[64];
    REQUIRE(sl_scores_format(&sc, buf, sizeof buf) == SL_OK);
    CHECK(std::string(buf) == "accu=0.7500 mIoU=0.6000 fIoU=0.6000");

    sl_confusion* small = nullptr;
    REQUIRE(sl_confusion_create(1, &small) == SL_OK);
    CHECK(sl_confusion_add(small, p, g) == SL_ERR_LABEL_OUT_OF_RANGE);
    sl_confusion_free(small);
    sl_confusion_free(cm);
    sl_labels_free(g);
    sl_labels_free(p);
  }

  TEST_CASE("closed loop and dataset runner") {
    Scratch s;
    sl_synth_params sp;
    sl_synth_params_default(&sp);
    sp.width = sp.height = 40;
    REQUIRE(sl_write_synthetic(7, 2, s.dir.string().c_str(), &sp) == SL_OK);

    sl_image* img = nullptr;
    sl_labels* seeds = nullptr;
    sl_labels* gt = nullptr;
    REQUIRE(sl_image_load_ppm((s / "scene_000.ppm").c_str(), &img) == SL_OK);
    REQUIRE(sl_labels_load_pgm((s / "scene_000.seeds.pgm").c_str(), &seeds) == SL_OK);
    REQUIRE(sl_labels_load_pgm((s / "scene_000.gt.pgm").c_str(), &gt) == SL_OK);
    sl_config* cfg = nullptr;
    REQUIRE(sl_config_default(&cfg) == SL_OK);
    REQUIRE(sl_config_set(cfg, "total_epochs", "12") == SL_OK);

    sl_loop_result* res = nullptr;
    REQUIRE(sl_loop_run(img, seeds, gt, cfg, &res) == SL_OK);
    size_t epochs = 0;
    REQUIRE(sl_loop_epochs(res, &epochs) == SL_OK);
    CHECK(epochs >= 10);
    CHECK(epochs <= 12);
    size_t needed = 0;
    REQUIRE(sl_loop_trace(res, nullptr, 0, &needed) == SL_OK);
    std::string trace(needed, '\0');
    REQUIRE(sl_loop_trace(res, trace.data(), trace.size(), &needed) == SL_OK);
    CHECK(trace.rfind("# epoch", 0) == 0);
    sl_labels* pred = nullptr;
    REQUIRE(sl_loop_prediction(res, &pred) == SL_OK);
    int w = 0, h = 0;
    REQUIRE(sl_labels_size(pred, &w, &h) == SL_OK);
    CHECK(w == 40);
    sl_seeds* fin = nullptr;
    REQUIRE(sl_loop_final_seeds(res, &fin) == SL_OK);

    const std::vector<uint8_t> none(40 * 40, 255);
    sl_labels* empty = nullptr;
    REQUIRE(sl_labels_create(40, 40, none.data(), &empty) == SL_OK);
    sl_loop_result* bad = nullptr;
    CHECK(sl_loop_run(img, empty, nullptr, cfg, &bad) == SL_ERR_EMPTY_SEEDS);

    sl_dataset_report rep;
    REQUIRE(sl_run_dataset(s.dir.string().c_str(), cfg, (s / "out").c_str(), &rep) == SL_OK);
    CHECK(rep.n_images == 2);
    CHECK(rep.n_categories >= 2);
    CHECK(fs::exists(s / "out/scene_001.pred.pgm"));
    CHECK(sl_run_dataset((s / "nowhere").c_str(), cfg, (s / "out").c_str(), &rep) == SL_ERR_MISSING_FILE);

    sl_labels_free(empty);
    sl_seeds_free(fin);
    sl_labels_free(pred);
    sl_loop_result_free(res);
    sl_config_free(cfg);
    sl_labels_free(gt);
    sl_labels_free(seeds);
    sl_image_free(img);
  }
}
