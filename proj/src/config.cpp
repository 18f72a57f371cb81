#include "verbspace/config.hpp"

#include <json.hpp>

#include "verbspace/errors.hpp"

namespace verbspace {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  require(j.is_object(), "document must be an object");

  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "taxonomy_path") {
        cfg.taxonomy_path = value.get<std::string>();
      } else if (key == "d") {
        cfg.d = value.get<int>();
      } else if (key == "n") {
        cfg.n = value.get<int>();
      } else if (key == "d_text") {
        cfg.d_text = value.get<int>();
      } else if (key == "c") {
        cfg.c = value.get<double>();
      } else if (key == "K") {
        cfg.K = value.get<double>();
      } else if (key == "gamma") {
        cfg.gamma = value.get<double>();
      } else if (key == "omega") {
        cfg.omega = value.get<double>();
      } else if (key == "lr") {
        cfg.lr = value.get<double>();
      } else if (key == "warmup_epochs") {
        cfg.warmup_epochs = value.get<int>();
      } else if (key == "epochs_phase1") {
        cfg.epochs_phase1 = value.get<int>();
      } else if (key == "epochs_phase2") {
        cfg.epochs_phase2 = value.get<int>();
      } else if (key == "batch_size") {
        cfg.batch_size = value.get<int>();
      } else if (key == "head_hidden") {
        cfg.head_hidden = value.get<int>();
      } else if (key == "disentangle") {
        cfg.disentangle = value.get<bool>();
      } else if (key == "rare_threshold") {
        cfg.rare_threshold = value.get<std::int64_t>();
      } else if (key == "fps") {
        cfg.fps = value.get<double>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "ancestor_closure") {
        cfg.ancestor_closure = value.get<bool>();
      } else if (key == "unknown_eval_policy") {
        cfg.unknown_eval_policy = value.get<std::string>();
      } else if (key == "hard_pseudo_labels") {
        cfg.hard_pseudo_labels = value.get<bool>();
      } else if (key == "hard_pseudo_threshold") {
        cfg.hard_pseudo_threshold = value.get<double>();
      } else if (key == "token_budget") {
        cfg.token_budget = value.get<int>();
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
  }

  require(cfg.d >= 1, "d must be >= 1");
  require(cfg.n >= 1, "n must be >= 1");
  require(cfg.d_text >= 1, "d_text must be >= 1");
  require(cfg.c > 0.0, "c must be > 0");
  require(cfg.K > 0.0, "K must be > 0");
  require(cfg.gamma > 0.0, "gamma must be > 0");
  require(cfg.omega >= 0.0, "omega must be >= 0");
  require(cfg.lr > 0.0, "lr must be > 0");
  require(cfg.warmup_epochs >= 0, "warmup_epochs must be >= 0");
  require(cfg.epochs_phase1 >= 0, "epochs_phase1 must be >= 0");
  require(cfg.epochs_phase2 >= 0, "epochs_phase2 must be >= 0");
  require(cfg.batch_size >= 1, "batch_size must be >= 1");
  require(cfg.head_hidden >= 0, "head_hidden must be >= 0");
  require(cfg.rare_threshold >= 0, "rare_threshold must be >= 0");
  require(cfg.fps > 0.0, "fps must be > 0");
  require(cfg.unknown_eval_policy == "negative" || cfg.unknown_eval_policy == "exclude",
          "unknown_eval_policy must be 'negative' or 'exclude'");
  require(cfg.hard_pseudo_threshold >= 0.0 && cfg.hard_pseudo_threshold <= 1.0,
          "hard_pseudo_threshold must be in [0, 1]");
  require(cfg.token_budget >= 1, "token_budget must be >= 1");
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["taxonomy_path"] = cfg.taxonomy_path;
  j["d"] = cfg.d;
  j["n"] = cfg.n;
  j["d_text"] = cfg.d_text;
  j["c"] = cfg.c;
  j["K"] = cfg.K;
  j["gamma"] = cfg.gamma;
  j["omega"] = cfg.omega;
  j["lr"] = cfg.lr;
  j["warmup_epochs"] = cfg.warmup_epochs;
  j["epochs_phase1"] = cfg.epochs_phase1;
  j["epochs_phase2"] = cfg.epochs_phase2;
  j["batch_size"] = cfg.batch_size;
  j["head_hidden"] = cfg.head_hidden;
  j["disentangle"] = cfg.disentangle;
  j["rare_threshold"] = cfg.rare_threshold;
  j["fps"] = cfg.fps;
  j["seed"] = cfg.seed;
  j["ancestor_closure"] = cfg.ancestor_closure;
  j["unknown_eval_policy"] = cfg.unknown_eval_policy;
  j["hard_pseudo_labels"] = cfg.hard_pseudo_labels;
  j["hard_pseudo_threshold"] = cfg.hard_pseudo_threshold;
  j["token_budget"] = cfg.token_budget;
  return j.dump(2) + "\n";
}

HyperParams to_hyper(const RunConfig& cfg) {
  HyperParams hp;
  hp.c = cfg.c;
  hp.K = cfg.K;
  hp.gamma = cfg.gamma;
  hp.omega = cfg.omega;
  hp.lr = cfg.lr;
  hp.warmup_epochs = cfg.warmup_epochs;
  hp.epochs_phase1 = cfg.epochs_phase1;
  hp.epochs_phase2 = cfg.epochs_phase2;
  hp.batch_size = cfg.batch_size;
  hp.embed_dim = cfg.n;
  hp.head_hidden = cfg.head_hidden;
  hp.disentangle = cfg.disentangle;
  hp.hard_pseudo = cfg.hard_pseudo_labels;
  hp.hard_pseudo_threshold = cfg.hard_pseudo_threshold;
  hp.seed = cfg.seed;
  return hp;
}

}  // namespace verbspace
