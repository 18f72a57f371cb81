#include "verbspace/config.hpp"

#include <doctest.h>

#include "verbspace/errors.hpp"

using namespace verbspace;

TEST_CASE("config defaults and round trip") {
  RunConfig cfg = parse_config("{}");
  CHECK(cfg.d == 64);
  CHECK(cfg.n == 16);
  CHECK(cfg.d_text == 512);
  CHECK(cfg.c == 1.0);
  CHECK(cfg.K == 0.1);
  CHECK(cfg.gamma == 1.0);
  CHECK(cfg.omega == 0.01);
  CHECK(cfg.fps == 3.0);
  CHECK(cfg.token_budget == 77);
  CHECK(cfg.unknown_eval_policy == "negative");
  CHECK(!cfg.ancestor_closure);
  CHECK(cfg.disentangle);

  cfg.seed = 1234567;
  cfg.epochs_phase2 = 9;
  cfg.unknown_eval_policy = "exclude";
  RunConfig back = parse_config(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.seed == 1234567);
  CHECK(back.epochs_phase2 == 9);
  CHECK(back.unknown_eval_policy == "exclude");
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1,2]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"typo_key": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"d": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"c": -1.0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"omega": -0.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"lr": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"fps": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"batch_size": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"unknown_eval_policy": "maybe"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"hard_pseudo_threshold": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"token_budget": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"d": "many"})"), ConfigError);
}

TEST_CASE("to_hyper carries the model fields") {
  RunConfig cfg = parse_config(
      R"({"c": 2.0, "K": 0.2, "gamma": 3.0, "omega": 0.05, "lr": 0.7,
          "warmup_epochs": 4, "epochs_phase1": 11, "epochs_phase2": 6,
          "batch_size": 17, "n": 9, "head_hidden": 5, "disentangle": false,
          "hard_pseudo_labels": true, "hard_pseudo_threshold": 0.7, "seed": 21})");
  HyperParams hp = to_hyper(cfg);
  CHECK(hp.c == 2.0);
  CHECK(hp.K == 0.2);
  CHECK(hp.gamma == 3.0);
  CHECK(hp.omega == 0.05);
  CHECK(hp.lr == 0.7);
  CHECK(hp.warmup_epochs == 4);
  CHECK(hp.epochs_phase1 == 11);
  CHECK(hp.epochs_phase2 == 6);
  CHECK(hp.batch_size == 17);
  CHECK(hp.embed_dim == 9);
  CHECK(hp.head_hidden == 5);
  CHECK(!hp.disentangle);
  CHECK(hp.hard_pseudo);
  CHECK(hp.hard_pseudo_threshold == 0.7);
  CHECK(hp.seed == 21);
}
