#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "seedloop/error.hpp"
#include "seedloop/pipeline.hpp"

namespace seedloop {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    fail(ErrorCode::ConfigError, "invalid value for " + key + ": '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorCode::ConfigError, "invalid boolean for " + key + ": '" + v + "'");
}

using Setter = void (*)(LoopConfig&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"alpha_fg", [](LoopConfig& c, const std::string& k, const std::string& v) { c.gates.alpha_fg = parse_number<double>(k, v); }},
      {"alpha_bg", [](LoopConfig& c, const std::string& k, const std::string& v) { c.gates.alpha_bg = parse_number<double>(k, v); }},
      {"beta_fg", [](LoopConfig& c, const std::string& k, const std::string& v) { c.gates.beta_fg = parse_number<double>(k, v); }},
      {"beta_bg", [](LoopConfig& c, const std::string& k, const std::string& v) { c.gates.beta_bg = parse_number<double>(k, v); }},
      {"w", [](LoopConfig& c, const std::string& k, const std::string& v) { c.w = parse_number<double>(k, v); }},
      {"walk_steps", [](LoopConfig& c, const std::string& k, const std::string& v) { c.walk_steps = parse_number<int>(k, v); }},
      {"total_epochs", [](LoopConfig& c, const std::string& k, const std::string& v) { c.total_epochs = parse_number<int>(k, v); }},
      {"update_start_epoch", [](LoopConfig& c, const std::string& k, const std::string& v) { c.update_start_epoch = parse_number<int>(k, v); }},
      {"update_every", [](LoopConfig& c, const std::string& k, const std::string& v) { c.update_every = parse_number<int>(k, v); }},
      {"epochs_per_phase", [](LoopConfig& c, const std::string& k, const std::string& v) { c.epochs_per_phase = parse_number<int>(k, v); }},
      {"steps_per_epoch", [](LoopConfig& c, const std::string& k, const std::string& v) { c.steps_per_epoch = parse_number<int>(k, v); }},
      {"delta", [](LoopConfig& c, const std::string& k, const std::string& v) { c.conv.delta = parse_number<double>(k, v); }},
      {"rho", [](LoopConfig& c, const std::string& k, const std::string& v) { c.conv.rho = parse_number<double>(k, v); }},
      {"k", [](LoopConfig& c, const std::string& k, const std::string& v) { c.seg.k = parse_number<double>(k, v); }},
      {"sigma", [](LoopConfig& c, const std::string& k, const std::string& v) { c.seg.sigma = parse_number<double>(k, v); }},
      {"min_size", [](LoopConfig& c, const std::string& k, const std::string& v) { c.seg.min_size = parse_number<int>(k, v); }},
      {"merge_thresh", [](LoopConfig& c, const std::string& k, const std::string& v) { c.seg.merge_thresh = parse_number<double>(k, v); }},
      {"max_regions", [](LoopConfig& c, const std::string& k, const std::string& v) { c.seg.max_regions = parse_number<int>(k, v); }},
      {"learning_rate", [](LoopConfig& c, const std::string& k, const std::string& v) { c.learning_rate = parse_number<double>(k, v); }},
      {"l2", [](LoopConfig& c, const std::string& k, const std::string& v) { c.l2 = parse_number<double>(k, v); }},
      {"rng_seed", [](LoopConfig& c, const std::string& k, const std::string& v) { c.rng_seed = parse_number<std::uint64_t>(k, v); }},
      {"topk", [](LoopConfig& c, const std::string& k, const std::string& v) { c.topk = parse_number<int>(k, v); }},
      {"symmetrize", [](LoopConfig& c, const std::string&, const std::string& v) { c.symmetrize = parse_symmetrize(v); }},
      {"strict_eq3", [](LoopConfig& c, const std::string& k, const std::string& v) { c.strict_eq3 = parse_bool(k, v); }},
      {"n_categories", [](LoopConfig& c, const std::string& k, const std::string& v) { c.n_categories = parse_number<int>(k, v); }},
  };
  return table;
}

const char* symmetrize_name(Symmetrize s) {
  switch (s) {
    case Symmetrize::Or: return "or";
    case Symmetrize::And: return "and";
    default: return "none";
  }
}

// Nested field paths ("gates.alpha_fg", "conv.delta", "seg.k") name the same keys.
std::string canonical_key(const std::string& key) {
  static const std::map<std::string, std::vector<std::string>> groups = {
      {"gates", {"alpha_fg", "alpha_bg", "beta_fg", "beta_bg"}},
      {"conv", {"delta", "rho"}},
      {"seg", {"k", "sigma", "min_size", "merge_thresh", "max_regions"}},
  };
  const auto dot = key.find('.');
  if (dot == std::string::npos) return key;
  const auto g = groups.find(key.substr(0, dot));
  const std::string leaf = key.substr(dot + 1);
  if (g == groups.end() || std::find(g->second.begin(), g->second.end(), leaf) == g->second.end()) return key;
  return leaf;
}

}  // namespace

void LoopConfig::validate() const {
  gates.validate();
  conv.validate();
  seg.validate();
  require(w >= 0.0 && w <= 1.0, ErrorCode::WOutOfRange, "w must lie in [0,1]");
  require(walk_steps >= 1, ErrorCode::InvalidParams, "walk_steps must be >= 1");
  require(total_epochs >= 1, ErrorCode::InvalidParams, "total_epochs must be >= 1");
  require(update_start_epoch >= 1, ErrorCode::InvalidParams, "update_start_epoch must be >= 1");
  require(update_every >= 1, ErrorCode::InvalidParams, "update_every must be >= 1");
  require(epochs_per_phase >= 1, ErrorCode::InvalidParams, "epochs_per_phase must be >= 1");
  require(steps_per_epoch >= 1, ErrorCode::InvalidParams, "steps_per_epoch must be >= 1");
  require(learning_rate > 0.0, ErrorCode::InvalidParams, "learning_rate must be > 0");
  require(l2 >= 0.0, ErrorCode::InvalidParams, "l2 must be >= 0");
  require(topk >= 1, ErrorCode::InvalidParams, "topk must be >= 1");
  require(n_categories == 0 || (n_categories >= 2 && n_categories < kIgnoreLabel), ErrorCode::InvalidParams,
          "n_categories must be 0 (infer) or 2..254");
}


void set_config_value(LoopConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(canonical_key(key));
  if (it == setters().end()) fail(ErrorCode::ConfigError, "unknown key '" + key + "'");
  it->second(cfg, key, value);
}

LoopConfig parse_config(const std::string& text) {
  LoopConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!setters().contains(canonical_key(key)))
      fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    set_config_value(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

LoopConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const LoopConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "alpha_fg = " << c.gates.alpha_fg << "\nalpha_bg = " << c.gates.alpha_bg << "\nbeta_fg = " << c.gates.beta_fg
    << "\nbeta_bg = " << c.gates.beta_bg << "\nw = " << c.w << "\nwalk_steps = " << c.walk_steps
    << "\ntotal_epochs = " << c.total_epochs << "\nupdate_start_epoch = " << c.update_start_epoch
    << "\nupdate_every = " << c.update_every << "\nepochs_per_phase = " << c.epochs_per_phase
    << "\nsteps_per_epoch = " << c.steps_per_epoch
    << "\ndelta = " << c.conv.delta << "\nrho = " << c.conv.rho << "\nk = " << c.seg.k << "\nsigma = " << c.seg.sigma
    << "\nmin_size = " << c.seg.min_size << "\nmerge_thresh = " << c.seg.merge_thresh
    << "\nmax_regions = " << c.seg.max_regions << "\nlearning_rate = " << c.learning_rate << "\nl2 = " << c.l2
    << "\nrng_seed = " << c.rng_seed << "\ntopk = " << c.topk << "\nsymmetrize = " << symmetrize_name(c.symmetrize)
    << "\nstrict_eq3 = " << (c.strict_eq3 ? "true" : "false") << "\nn_categories = " << c.n_categories << "\n";
  return o.str();
}

}  // namespace seedloop
