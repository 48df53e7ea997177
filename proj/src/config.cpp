#include "lpplvv/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include "lpplvv/error.hpp"

namespace lpplvv {

ExperimentConfig ExperimentConfig::desk_scale() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::paper_scale() {
  ExperimentConfig cfg;
  cfg.base = "paper";
  cfg.runs = 565;
  return cfg;
}

abcde::BatchConfig ExperimentConfig::batch() const {
  auto b = abcde;
  b.runs = runs;
  b.seed = seed;
  return b;
}

const SearchConfig& ExperimentConfig::search(Algorithm a) const {
  return a == Algorithm::subordinated ? subordinated_search : phase_transition_search;
}

void ExperimentConfig::validate() const {
  if (runs < 2) throw Error(ErrorKind::config, "runs must be >= 2");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::config, "threshold must lie in (0,1)");
  }
  if (fractions.empty()) throw Error(ErrorKind::config, "no window fractions selected");
  for (auto f : fractions) {
    if (f == WindowClass::subsample) throw Error(ErrorKind::config, "invalid window fraction");
  }
  if (algorithms.empty()) throw Error(ErrorKind::config, "no algorithm selected");
  if (subsample_count < 1) throw Error(ErrorKind::config, "subsample count must be >= 1");
  if (source != "abcde" && source != "synthetic") {
    throw Error(ErrorKind::config, "source must be 'abcde' or 'synthetic'");
  }
  for (const auto* s : {&subordinated_search, &phase_transition_search}) {
    if (!(s->m_bounds.hi > s->m_bounds.lo) || !(s->omega_bounds.hi > s->omega_bounds.lo) ||
        !(s->amplitude_bounds.hi > s->amplitude_bounds.lo)) {
      throw Error(ErrorKind::config, "search bounds must be nonempty intervals");
    }
    if (!(s->tc_grid.step > 0.0) || !(s->tc_grid.min_offset > 0.0) ||
        !(s->tc_grid.max_offset_fraction > 0.0)) {
      throw Error(ErrorKind::config, "tc grid must lie strictly beyond the window end");
    }
    if (s->lattice_per_axis < 1) throw Error(ErrorKind::config, "lattice_per_axis must be >= 1");
  }
}

namespace {

Json interval_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

Interval interval_from(const nlohmann::json& j, Interval fallback) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorKind::config, "interval must be a [lo, hi] pair");
  }
  fallback.lo = j[0].get<double>();
  fallback.hi = j[1].get<double>();
  return fallback;
}

Json search_json(const SearchConfig& s) {
  Json j;
  j["tc_grid"] = {{"min_offset", s.tc_grid.min_offset},
                  {"step", s.tc_grid.step},
                  {"max_offset_fraction", s.tc_grid.max_offset_fraction}};
  j["m_bounds"] = interval_json(s.m_bounds);
  j["omega_bounds"] = interval_json(s.omega_bounds);
  j["amplitude_bounds"] = interval_json(s.amplitude_bounds);
  j["lattice_per_axis"] = s.lattice_per_axis;
  j["ftol"] = s.optimizer.ftol;
  j["xtol"] = s.optimizer.xtol;
  j["max_evals"] = s.optimizer.max_evals;
  return j;
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SearchConfig search_from(const nlohmann::json& j, SearchConfig s) {
  if (j.contains("tc_grid")) {
    const auto& g = j.at("tc_grid");
    read(g, "min_offset", s.tc_grid.min_offset);
    read(g, "step", s.tc_grid.step);
    read(g, "max_offset_fraction", s.tc_grid.max_offset_fraction);
  }
  if (j.contains("m_bounds")) s.m_bounds = interval_from(j.at("m_bounds"), s.m_bounds);
  if (j.contains("omega_bounds")) s.omega_bounds = interval_from(j.at("omega_bounds"), s.omega_bounds);
  if (j.contains("amplitude_bounds")) {
    s.amplitude_bounds = interval_from(j.at("amplitude_bounds"), s.amplitude_bounds);
  }
  read(j, "lattice_per_axis", s.lattice_per_axis);
  read(j, "ftol", s.optimizer.ftol);
  read(j, "xtol", s.optimizer.xtol);
  read(j, "max_evals", s.optimizer.max_evals);
  return s;
}

const char* const kParamKeys[] = {"sigma", "rho", "beta", "a1", "a2", "alpha", "epsilon"};

double& param_ref(abcde::Params& p, const std::string& k) {
  if (k == "sigma") return p.sigma;
  if (k == "rho") return p.rho;
  if (k == "beta") return p.beta;
  if (k == "a1") return p.a1;
  if (k == "a2") return p.a2;
  if (k == "alpha") return p.alpha;
  return p.epsilon;
}

}  // namespace

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["base"] = cfg.base;
  j["source"] = cfg.source;
  Json a;
  a["preset"] = cfg.abcde.preset;
  auto params = cfg.abcde.params;
  for (const char* k : kParamKeys) a[k] = param_ref(params, k);
  a["initial"] = {{"x", cfg.abcde.initial.x},
                  {"y", cfg.abcde.initial.y},
                  {"z", cfg.abcde.initial.z},
                  {"r", cfg.abcde.initial.r},
                  {"theta", cfg.abcde.initial.theta}};
  a["dt"] = cfg.abcde.dt;
  a["substeps"] = cfg.abcde.substeps;
  a["horizon"] = cfg.abcde.horizon;
  a["jitter"] = cfg.abcde.jitter;
  a["bound"] = cfg.abcde.bound;
  j["abcde"] = a;
  const auto& sy = cfg.synthetic;
  j["synthetic"] = {{"A", sy.shape.A},
                    {"B", sy.shape.B},
                    {"C", sy.shape.C},
                    {"m", sy.shape.m},
                    {"omega", sy.shape.omega},
                    {"psi", sy.shape.psi},
                    {"dt", sy.dt},
                    {"rise_samples", sy.rise_samples},
                    {"m_jitter", sy.m_jitter},
                    {"omega_jitter", sy.omega_jitter},
                    {"noise", sy.noise}};
  j["runs"] = cfg.runs;
  j["seed"] = cfg.seed;
  j["threshold"] = cfg.threshold;
  Json fr = Json::array();
  for (auto f : cfg.fractions) fr.push_back(to_string(f));
  j["fractions"] = fr;
  j["min_window_samples"] = cfg.min_window_samples;
  j["subsamples"] = {{"count", cfg.subsample_count}, {"min_len", cfg.subsample_min_len}};
  j["search"] = {{"subordinated", search_json(cfg.subordinated_search)},
                 {"phase_transition", search_json(cfg.phase_transition_search)}};
  Json al = Json::array();
  for (auto x : cfg.algorithms) al.push_back(to_string(x));
  j["algorithms"] = al;
  j["paired"] = cfg.paired;
  j["holm"] = stats::to_string(cfg.holm);
  j["output_dir"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
    const std::string base = j.value("base", std::string("desk"));
    ExperimentConfig cfg;
    if (base == "desk") {
      cfg = ExperimentConfig::desk_scale();
    } else if (base == "paper") {
      cfg = ExperimentConfig::paper_scale();
    } else {
      throw Error(ErrorKind::config, "unknown base '" + base + "'");
    }
    read(j, "source", cfg.source);
    if (j.contains("abcde")) {
      const auto& a = j.at("abcde");
      read(a, "preset", cfg.abcde.preset);
      cfg.abcde.params = abcde::preset(cfg.abcde.preset);
      for (const char* k : kParamKeys) read(a, k, param_ref(cfg.abcde.params, k));
      if (a.contains("initial")) {
        const auto& s = a.at("initial");
        read(s, "x", cfg.abcde.initial.x);
        read(s, "y", cfg.abcde.initial.y);
        read(s, "z", cfg.abcde.initial.z);
        read(s, "r", cfg.abcde.initial.r);
        read(s, "theta", cfg.abcde.initial.theta);
      }
      read(a, "dt", cfg.abcde.dt);
      read(a, "substeps", cfg.abcde.substeps);
      read(a, "horizon", cfg.abcde.horizon);
      read(a, "jitter", cfg.abcde.jitter);
      read(a, "bound", cfg.abcde.bound);
    }
    if (j.contains("synthetic")) {
      const auto& s = j.at("synthetic");
      auto& sy = cfg.synthetic;
      read(s, "A", sy.shape.A);
      read(s, "B", sy.shape.B);
      read(s, "C", sy.shape.C);
      read(s, "m", sy.shape.m);
      read(s, "omega", sy.shape.omega);
      read(s, "psi", sy.shape.psi);
      read(s, "dt", sy.dt);
      read(s, "rise_samples", sy.rise_samples);
      read(s, "m_jitter", sy.m_jitter);
      read(s, "omega_jitter", sy.omega_jitter);
      read(s, "noise", sy.noise);
    }
    read(j, "runs", cfg.runs);
    read(j, "seed", cfg.seed);
    read(j, "threshold", cfg.threshold);
    if (j.contains("fractions")) {
      cfg.fractions.clear();
      for (const auto& f : j.at("fractions")) {
        cfg.fractions.push_back(window_class_from_string(f.get<std::string>()));
      }
    }
    read(j, "min_window_samples", cfg.min_window_samples);
    if (j.contains("subsamples")) {
      read(j.at("subsamples"), "count", cfg.subsample_count);
      read(j.at("subsamples"), "min_len", cfg.subsample_min_len);
    }
    if (j.contains("search")) {
      const auto& s = j.at("search");
      if (s.contains("subordinated")) {
        cfg.subordinated_search = search_from(s.at("subordinated"), cfg.subordinated_search);
      }
      if (s.contains("phase_transition")) {
        cfg.phase_transition_search =
            search_from(s.at("phase_transition"), cfg.phase_transition_search);
      }
    }
    if (j.contains("algorithms")) {
      cfg.algorithms.clear();
      const auto& al = j.at("algorithms");
      if (al.is_string()) {
        cfg.algorithms.push_back(algorithm_from_string(al.get<std::string>()));
      } else {
        for (const auto& x : al) cfg.algorithms.push_back(algorithm_from_string(x.get<std::string>()));
      }
    }
    read(j, "paired", cfg.paired);
    if (j.contains("holm")) cfg.holm = stats::holm_mode_from_string(j.at("holm").get<std::string>());
    read(j, "output_dir", cfg.output_dir);
    read(j, "workers", cfg.workers);
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    throw Error(ErrorKind::config, e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, "'" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << to_json(cfg).dump(2) << '\n';
}

std::vector<std::string> documented_keys() {
  std::vector<std::string> keys;
  std::function<void(const Json&, const std::string&)> walk = [&](const Json& j,
                                                                  const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it->is_object()) {
        walk(*it, key);
      } else {
        keys.push_back(key);
      }
    }
  };
  walk(to_json(ExperimentConfig{}), "");
  return keys;
}

void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value) {
  static const auto allowed = [] {
    const auto k = documented_keys();
    return std::set<std::string>(k.begin(), k.end());
  }();
  if (!allowed.count(key)) throw Error(ErrorKind::config, "unknown config key '" + key + "'");
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;
  }
  nlohmann::json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      break;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = nlohmann::json::object();
    node = &(*node)[part];
    pos = dot + 1;
  }
}

std::string fingerprint(const ExperimentConfig& cfg) {
  auto j = to_json(cfg);
  j.erase("output_dir");
  j.erase("workers");
  const std::string canonical = nlohmann::json(j).dump();  // sorted keys
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lpplvv
