#pragma once

// Experiment configuration: one JSON document, every field optional.
// Missing keys fall back to the `base` scale preset ("desk" or "paper"),
// and ABCDE control values fall back to the named ABCDE preset.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpplvv/abcde.hpp"
#include "lpplvv/estimators.hpp"
#include "lpplvv/stats.hpp"

namespace lpplvv {

// Noiseless (or noisy) LPPL rises injected in place of ABCDE output, with
// ground truth known by construction. See synthetic_critical_series().
// Defaults rise monotonically from ~0.05 A to A over the rise, so the half,
// third and quarter crossings all fall inside it (|C| sqrt(m^2 + omega^2)
// < |B| m keeps the derivative positive).
struct SyntheticSource {
  LpplParams shape{1.0, -0.365, 0.005, 0.2, 8.0, 1.0, 0.0};  // tc is placed per run
  double dt = 1.0;
  std::size_t rise_samples = 120;
  double m_jitter = 0.0;      // uniform half-widths, per run
  double omega_jitter = 0.0;
  double noise = 0.0;         // additive N(0, noise^2)
};

struct ExperimentConfig {
  std::string base = "desk";
  std::string source = "abcde";  // "abcde" or "synthetic"
  abcde::BatchConfig abcde;      // runs and seed are taken from below
  SyntheticSource synthetic;
  std::size_t runs = 50;
  std::uint64_t seed = 20240101;
  double threshold = 0.15;
  std::vector<WindowClass> fractions{WindowClass::half, WindowClass::third,
                                     WindowClass::quarter};
  std::size_t min_window_samples = 50;
  std::size_t subsample_count = 10;
  std::size_t subsample_min_len = 30;
  SearchConfig subordinated_search;
  SearchConfig phase_transition_search;
  std::vector<Algorithm> algorithms{Algorithm::subordinated};
  bool paired = true;
  stats::HolmMode holm = stats::HolmMode::standard;
  std::string output_dir = "lpplvv-out";
  int workers = 0;  // 0 = OpenMP default

  static ExperimentConfig desk_scale();
  static ExperimentConfig paper_scale();

  abcde::BatchConfig batch() const;
  const SearchConfig& search(Algorithm a) const;

  void validate() const;
};

using Json = nlohmann::ordered_json;

Json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// `key` is a dotted path such as "abcde.epsilon"; `value` is parsed as JSON
// and kept as a string when that fails. Unknown keys raise config errors.
void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value);

// Every dotted key accepted by apply_override.
std::vector<std::string> documented_keys();

// FNV-1a over the canonical JSON of the result-affecting fields.
std::string fingerprint(const ExperimentConfig& cfg);

}  // namespace lpplvv
