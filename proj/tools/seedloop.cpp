#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "seedloop/seedloop.h"

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  sl_status status;
  Failure(sl_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(sl_status s) {
  if (s != SL_OK) throw Failure(s, sl_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
template <class T, void (*Free)(T*)>
using Owned = std::unique_ptr<T, Deleter<T, Free>>;

using Image = Owned<sl_image, sl_image_free>;
using Labels = Owned<sl_labels, sl_labels_free>;
using Spmap = Owned<sl_spmap, sl_spmap_free>;
using Features = Owned<sl_features, sl_features_free>;
using Relmat = Owned<sl_relmat, sl_relmat_free>;
using Seeds = Owned<sl_seeds, sl_seeds_free>;
using Confusion = Owned<sl_confusion, sl_confusion_free>;
using Config = Owned<sl_config, sl_config_free>;
using LoopResult = Owned<sl_loop_result, sl_loop_result_free>;

// Wraps a C constructor of the form f(args..., T** out).
template <class Holder, class F, class... Args>
Holder make(F f, Args&&... args) {
  typename Holder::pointer raw = nullptr;
  check(f(std::forward<Args>(args)..., &raw));
  return Holder(raw);
}

std::string format(const sl_scores& s) {
  char buf[128];
  check(sl_scores_format(&s, buf, sizeof buf));
  return buf;
}

Config load_config(const std::string& path) {
  if (path.empty()) return make<Config>(sl_config_default);
  return make<Config>(sl_config_load, path.c_str());
}

void write_file(const fs::path& path, const std::string& text) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) throw Failure(SL_ERR_IO, "cannot write " + path.string());
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw Failure(SL_ERR_IO, "cannot write " + path.string());
}

std::string trace_text(const sl_loop_result* r) {
  std::size_t needed = 0;
  check(sl_loop_trace(r, nullptr, 0, &needed));
  std::string text(needed, '\0');
  check(sl_loop_trace(r, text.data(), text.size(), nullptr));
  text.resize(needed - 1);
  return text;
}

constexpr const char* kPredSuffix = ".pred.pgm";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seedloop: closed-loop weakly supervised segmentation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sl_version());

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset of images, seeds and ground truth");
  std::uint64_t synth_seed = 7;
  int synth_count = 20;
  std::string synth_out;
  synth->add_option("--seed", synth_seed, "RNG seed")->capture_default_str();
  synth->add_option("--count", synth_count, "Number of scenes")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--out-dir", synth_out, "Output directory")->required();

  // superpix
  auto* superpix = app.add_subcommand("superpix", "Compute superpixels of an image");
  sl_seg_params seg;
  sl_seg_params_default(&seg);
  std::string sp_image, sp_out;
  superpix->add_option("--image", sp_image, "Input PPM")->required();
  superpix->add_option("--k", seg.k, "Graph segmentation scale")->capture_default_str();
  superpix->add_option("--sigma", seg.sigma, "Pre-smoothing sigma")->capture_default_str();
  superpix->add_option("--min-size", seg.min_size, "Minimum region size")->capture_default_str();
  superpix->add_option("--merge-thresh", seg.merge_thresh, "Region merge threshold")->capture_default_str();
  superpix->add_option("--out", sp_out, "Output superpixel tensor")->required();

  // features
  auto* features = app.add_subcommand("features", "Compute per-superpixel features");
  std::string ft_image, ft_sp, ft_out, ft_external;
  features->add_option("--image", ft_image, "Input PPM")->required();
  features->add_option("--sp", ft_sp, "Superpixel tensor")->required();
  features->add_option("--out", ft_out, "Output feature tensor")->required();
  features->add_option("--external", ft_external, "Use an f32 [N,D] feature tensor instead");

  // relmat
  auto* relmat = app.add_subcommand("relmat", "Build similarity, adjacency and relationship matrices");
  std::string rm_features, rm_sp, rm_out, rm_sym = "none";
  int rm_topk = 10;
  relmat->add_option("--features", rm_features, "Feature tensor")->required();
  relmat->add_option("--sp", rm_sp, "Superpixel tensor")->required();
  relmat->add_option("--topk", rm_topk, "Neighbours kept per superpixel")->capture_default_str();
  relmat->add_option("--symmetrize", rm_sym, "none, or, and")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "or", "and"}));
  relmat->add_option("--out", rm_out, "Output tensor [3,N,N]")->required();

  // walk
  auto* walk = app.add_subcommand("walk", "Expand seeds with the customized random walk");
  sl_gate_params gates;
  sl_gate_params_default(&gates);
  std::string wk_seeds, wk_netout, wk_rel, wk_out;
  int wk_steps = 2;
  bool wk_strict = false;
  walk->add_option("--seeds", wk_seeds, "Seed tensor [C,N]")->required();
  walk->add_option("--netout", wk_netout, "Network output tensor [C,N]")->required();
  walk->add_option("--rel", wk_rel, "Relationship tensor")->required();
  walk->add_option("--steps", wk_steps, "Walk steps")->capture_default_str();
  walk->add_option("--alpha-fg", gates.alpha_fg, "Seed gate, foreground")->capture_default_str();
  walk->add_option("--alpha-bg", gates.alpha_bg, "Seed gate, background")->capture_default_str();
  walk->add_option("--beta-fg", gates.beta_fg, "Network output gate, foreground")->capture_default_str();
  walk->add_option("--beta-bg", gates.beta_bg, "Network output gate, background")->capture_default_str();
  walk->add_flag("--strict-eq3", wk_strict, "Return the raw walk without keeping the gated seeds");
  walk->add_option("--out", wk_out, "Output mixed seed tensor")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  std::string ev_pred, ev_gt, ev_pred_dir, ev_gt_dir;
  std::size_t ev_classes = 0;
  auto* o_pred = eval->add_option("--pred", ev_pred, "Predicted label PGM");
  auto* o_gt = eval->add_option("--gt", ev_gt, "Ground-truth label PGM");
  auto* o_pred_dir = eval->add_option("--pred-dir", ev_pred_dir, "Directory of <id>.pred.pgm")
                         ->check(CLI::ExistingDirectory);
  auto* o_gt_dir = eval->add_option("--gt-dir", ev_gt_dir, "Directory of <id>.gt.pgm")->check(CLI::ExistingDirectory);
  eval->add_option("--classes", ev_classes, "Number of classes")->required()->check(CLI::Range(1, 254));
  o_pred->needs(o_gt);
  o_gt->needs(o_pred);
  o_pred_dir->needs(o_gt_dir);
  o_gt_dir->needs(o_pred_dir);
  o_pred->excludes(o_pred_dir);
  o_pred_dir->excludes(o_pred);

  // loop
  auto* loop = app.add_subcommand("loop", "Run the closed loop on one image");
  std::string lp_image, lp_seeds, lp_gt, lp_config, lp_out;
  loop->add_option("--image", lp_image, "Input PPM")->required();
  loop->add_option("--seeds", lp_seeds, "Initial seed PGM (255 = unlabelled)")->required();
  loop->add_option("--gt", lp_gt, "Ground-truth PGM for tracing and scoring");
  loop->add_option("--config", lp_config, "Config file (key = value)");
  loop->add_option("--out-dir", lp_out, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Run the closed loop over a dataset directory");
  std::string rn_data, rn_config, rn_out;
  run->add_option("--data-dir", rn_data, "Directory of <id>.ppm/.seeds.pgm/.gt.pgm")
      ->required()
      ->check(CLI::ExistingDirectory);
  run->add_option("--config", rn_config, "Config file (key = value)");
  run->add_option("--out-dir", rn_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      check(sl_write_synthetic(synth_seed, synth_count, synth_out.c_str(), nullptr));
      std::printf("wrote %d scenes to %s\n", synth_count, synth_out.c_str());
    } else if (*superpix) {
      auto image = make<Image>(sl_image_load_ppm, sp_image.c_str());
      auto sp = make<Spmap>(sl_superpixels_compute, image.get(), &seg);
      check(sl_spmap_save(sp.get(), sp_out.c_str()));
      std::size_t n = 0;
      check(sl_spmap_regions(sp.get(), &n));
      std::printf("regions=%zu\n", n);
    } else if (*features) {
      auto sp = make<Spmap>(sl_spmap_load, ft_sp.c_str());
      Features f;
      if (!ft_external.empty()) {
        f = make<Features>(sl_features_load, ft_external.c_str(), sp.get());
      } else {
        auto image = make<Image>(sl_image_load_ppm, ft_image.c_str());
        f = make<Features>(sl_features_compute, image.get(), sp.get());
      }
      check(sl_features_save(f.get(), ft_out.c_str()));
    } else if (*relmat) {
      auto sp = make<Spmap>(sl_spmap_load, rm_sp.c_str());
      auto f = make<Features>(sl_features_load, rm_features.c_str(), sp.get());
      auto rel = make<Relmat>(sl_relmat_build, f.get(), sp.get(), rm_topk, rm_sym.c_str());
      check(sl_relmat_save(rel.get(), rm_out.c_str()));
    } else if (*walk) {
      auto s = make<Seeds>(sl_seeds_load, wk_seeds.c_str());
      auto n = make<Seeds>(sl_seeds_load, wk_netout.c_str());
      auto rel = make<Relmat>(sl_relmat_load, wk_rel.c_str());
      auto mixed = make<Seeds>(sl_walk, s.get(), rel.get(), n.get(), &gates, wk_steps, wk_strict ? 1 : 0);
      check(sl_seeds_save(mixed.get(), wk_out.c_str()));
    } else if (*eval) {
      auto cm = make<Confusion>(sl_confusion_create, ev_classes);
      std::vector<std::pair<fs::path, fs::path>> pairs;
      if (!ev_pred.empty()) {
        pairs.emplace_back(ev_pred, ev_gt);
      } else if (!ev_pred_dir.empty()) {
        std::set<fs::path> preds;
        for (const auto& e : fs::directory_iterator(ev_pred_dir)) {
          const std::string name = e.path().filename().string();
          if (e.is_regular_file() && name.size() > std::string(kPredSuffix).size() && name.ends_with(kPredSuffix))
            preds.insert(e.path());
        }
        if (preds.empty()) throw Failure(SL_ERR_MISSING_FILE, "no *.pred.pgm files in " + ev_pred_dir);
        for (const auto& p : preds) {
          const std::string name = p.filename().string();
          const std::string id = name.substr(0, name.size() - std::string(kPredSuffix).size());
          const fs::path gt = fs::path(ev_gt_dir) / (id + ".gt.pgm");
          if (!fs::exists(gt)) throw Failure(SL_ERR_MISSING_FILE, "missing " + gt.string());
          pairs.emplace_back(p, gt);
        }
      } else {
        throw CLI::RequiredError("--pred/--gt or --pred-dir/--gt-dir");
      }
      for (const auto& [p, g] : pairs) {
        auto pred = make<Labels>(sl_labels_load_pgm, p.string().c_str());
        auto gt = make<Labels>(sl_labels_load_pgm, g.string().c_str());
        check(sl_confusion_add(cm.get(), pred.get(), gt.get()));
      }
      sl_scores s;
      check(sl_confusion_scores(cm.get(), &s));
      std::printf("%s\n", format(s).c_str());
    } else if (*loop) {
      auto cfg = load_config(lp_config);
      auto image = make<Image>(sl_image_load_ppm, lp_image.c_str());
      auto seeds = make<Labels>(sl_labels_load_pgm, lp_seeds.c_str());
      Labels gt;
      if (!lp_gt.empty()) gt = make<Labels>(sl_labels_load_pgm, lp_gt.c_str());
      auto result = make<LoopResult>(sl_loop_run, image.get(), seeds.get(), gt.get(), cfg.get());

      fs::create_directories(lp_out);
      const std::string id = fs::path(lp_image).stem().string();
      const fs::path out = lp_out;
      auto pred = make<Labels>(sl_loop_prediction, result.get());
      check(sl_labels_save_pgm(pred.get(), (out / (id + kPredSuffix)).string().c_str()));
      write_file(out / (id + ".trace.txt"), trace_text(result.get()));
      auto final_seeds = make<Seeds>(sl_loop_final_seeds, result.get());
      check(sl_seeds_save(final_seeds.get(), (out / (id + ".seeds.dfnt")).string().c_str()));

      std::size_t epochs = 0;
      check(sl_loop_epochs(result.get(), &epochs));
      std::printf("epochs=%zu\n", epochs);
      if (gt) {
        std::size_t n_categories = 0;
        check(sl_seeds_shape(final_seeds.get(), &n_categories, nullptr));
        auto cm = make<Confusion>(sl_confusion_create, n_categories);
        check(sl_confusion_add(cm.get(), pred.get(), gt.get()));
        sl_scores s;
        check(sl_confusion_scores(cm.get(), &s));
        std::printf("%s\n", format(s).c_str());
      }
    } else if (*run) {
      auto cfg = load_config(rn_config);
      sl_dataset_report report;
      check(sl_run_dataset(rn_data.c_str(), cfg.get(), rn_out.c_str(), &report));
      std::printf("images=%zu classes=%zu\n", report.n_images, report.n_categories);
      std::printf("%s\n", format(report.final_scores).c_str());
      std::printf("seeds %s\n", format(report.seed_scores).c_str());
    }
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s: %s\n", sl_status_name(e.status), e.what());
    return 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
