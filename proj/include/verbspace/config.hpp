#pragma once

#include <cstdint>
#include <string>

#include "verbspace/model.hpp"

namespace verbspace {

/// Declarative run configuration. Unknown keys are rejected; numeric
/// fields are range-checked on load.
struct RunConfig {
  std::string taxonomy_path;  // optional; --taxonomy overrides

  int d = 64;        // sample feature dim
  int n = 16;        // embedding dim
  int d_text = 512;  // text feature dim

  double c = 1.0;
  double K = 0.1;
  double gamma = 1.0;
  double omega = 0.01;
  double lr = 0.1;
  int warmup_epochs = 2;
  int epochs_phase1 = 50;
  int epochs_phase2 = 0;
  int batch_size = 64;
  int head_hidden = 0;
  bool disentangle = true;

  std::int64_t rare_threshold = 10;
  double fps = 3.0;
  std::uint64_t seed = 0;
  bool ancestor_closure = false;
  std::string unknown_eval_policy = "negative";  // "negative" | "exclude"
  bool hard_pseudo_labels = false;
  double hard_pseudo_threshold = 0.5;
  int token_budget = 77;
};

/// Parse and validate. Throws ConfigError on syntax errors, unknown keys,
/// or out-of-range values.
RunConfig parse_config(const std::string& json_text);

/// Canonical JSON echo (all fields, sorted keys); parse_config round-trips.
std::string config_to_json(const RunConfig& cfg);

HyperParams to_hyper(const RunConfig& cfg);

}  // namespace verbspace
