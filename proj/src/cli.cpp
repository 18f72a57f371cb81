#include "verbspace/cli.hpp"

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "verbspace/augment.hpp"
#include "verbspace/config.hpp"
#include "verbspace/errors.hpp"
#include "verbspace/eval.hpp"
#include "verbspace/io.hpp"
#include "verbspace/model.hpp"
#include "verbspace/nodetext.hpp"
#include "verbspace/taxonomy.hpp"

namespace verbspace {

namespace {

Taxonomy load_taxonomy(const std::string& path) {
  return parse_taxonomy(read_file(path));
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  RunConfig cfg = parse_config(read_file(path));
  if (seed_override) cfg.seed = *seed_override;
  return cfg;
}

/// --taxonomy wins; the config's taxonomy_path is the fallback.
std::string resolve_taxonomy_path(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (!cfg.taxonomy_path.empty()) return cfg.taxonomy_path;
  throw ConfigError("no taxonomy given: pass --taxonomy or set taxonomy_path in the config");
}

void check_fingerprint(const Checkpoint& ckpt, const Taxonomy& tax) {
  if (ckpt.taxonomy_fingerprint != tax.fingerprint()) {
    throw FingerprintMismatch("checkpoint was trained against a different taxonomy (" +
                              std::to_string(ckpt.taxonomy_fingerprint) + " vs " +
                              std::to_string(tax.fingerprint()) + ")");
  }
}

void check_model_config(const Checkpoint& ckpt, const RunConfig& cfg) {
  const ModelParams& p = ckpt.params;
  if (p.feat_dim != cfg.d || p.embed_dim != cfg.n || p.text_dim != cfg.d_text ||
      ckpt.hyper.c != cfg.c || ckpt.hyper.K != cfg.K || ckpt.hyper.gamma != cfg.gamma) {
    throw ConfigMismatch("config does not match the checkpoint's model dimensions");
  }
}

/// Join a label file with a feature file by sample id, in label order.
TrainData join_samples(const std::vector<PartialLabel>& labels, const FeatureFile& features) {
  std::map<std::string, Eigen::Index> by_id;
  for (std::size_t i = 0; i < features.ids.size(); ++i) {
    by_id[features.ids[i]] = static_cast<Eigen::Index>(i);
  }
  TrainData data;
  data.x.resize(features.x.rows(), static_cast<Eigen::Index>(labels.size()));
  data.labels = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = by_id.find(labels[i].sample_id);
    if (it == by_id.end()) {
      throw ConfigMismatch("no feature row for sample " + labels[i].sample_id);
    }
    data.x.col(static_cast<Eigen::Index>(i)) = features.x.col(it->second);
    data.ids.push_back(labels[i].sample_id);
  }
  return data;
}

int cmd_taxonomy_validate(const std::string& tax_path) {
  try {
    Taxonomy tax = load_taxonomy(tax_path);
    std::cout << "ok: " << tax.size() << " nodes, " << tax.leaf_ids().size() << " leaves\n";
    return 0;
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    std::cout << "invalid: " << e.what() << "\n";
    return 2;
  }
}

int cmd_taxonomy_show(const std::string& tax_path, const std::string& id) {
  Taxonomy tax = load_taxonomy(tax_path);
  std::cout << "nodes: " << tax.size() << "\n";
  std::cout << "leaves: " << tax.leaf_ids().size() << "\n";
  if (!id.empty()) {
    const VerbNode& n = tax.node(id);
    std::cout << "id: " << n.id << "\n";
    std::cout << "parent: " << (n.parent_id.empty() ? "-" : n.parent_id) << "\n";
    std::cout << "depth: " << tax.depth(id) << "\n";
    std::cout << "children: " << tax.children(id).size() << "\n";
    std::cout << "members: " << n.members.size() << "\n";
  }
  return 0;
}

int cmd_taxonomy_prompt(const std::string& tax_path, const std::string& id) {
  Taxonomy tax = load_taxonomy(tax_path);
  std::cout << geometric_prompt(tax, id) << "\n";
  return 0;
}

int cmd_ingest(const std::string& tax_path, const std::string& manifest_path,
               const std::string& mapping_path, const std::string& config_path,
               const std::string& out_path, bool allow_unmapped) {
  RunConfig cfg = load_config(config_path, std::nullopt);
  Taxonomy tax = load_taxonomy(resolve_taxonomy_path(tax_path, cfg));
  auto mappings = mappings_from_jsonl(read_file(mapping_path));
  auto by_dataset = accepted_by_dataset(mappings);
  auto samples = manifest_from_jsonl(read_file(manifest_path));
  group_manifest(samples, by_dataset);  // manifest-level invariants

  static const AcceptedMapping kEmptyMapping;
  std::vector<PartialLabel> out;
  for (const auto& s : samples) {
    auto it = by_dataset.find(s.dataset);
    const AcceptedMapping& am = it == by_dataset.end() ? kEmptyMapping : it->second;

    std::set<std::string> classes = s.classes;
    if (s.instances) classes = merge_instance_labels(*s.instances);

    std::vector<std::pair<std::string, std::set<std::string>>> rows;
    if (s.modality == Modality::VideoClip) {
      if (!s.duration_seconds) {
        throw MalformedManifest("clip sample " + s.sample_id + " has no duration");
      }
      for (auto& fr : expand_clip_labels(s.sample_id, *s.duration_seconds, classes, cfg.fps)) {
        rows.emplace_back(std::move(fr.frame_id), std::move(fr.classes));
      }
    } else {
      rows.emplace_back(s.sample_id, classes);
    }
    for (const auto& [id, cls] : rows) {
      PartialLabel y = translate_labels(id, cls, am, tax, allow_unmapped);
      if (cfg.ancestor_closure) y = ancestor_closure(y, tax);
      out.push_back(std::move(y));
    }
  }
  atomic_write(out_path, labels_to_jsonl(out, tax));
  std::cout << "wrote " << out.size() << " label records to " << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& tax_path,
              const std::string& labels_path, const std::string& features_path,
              const std::string& out_path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_config(config_path, seed);
  Taxonomy tax = load_taxonomy(resolve_taxonomy_path(tax_path, cfg));
  auto labels = labels_from_jsonl(read_file(labels_path), tax);
  FeatureFile features = read_features(features_path);
  if (features.x.rows() != cfg.d) {
    throw ConfigMismatch("feature file dim " + std::to_string(features.x.rows()) +
                         " does not match config d=" + std::to_string(cfg.d));
  }
  NodeFeatures nf = build_node_features(tax, cfg.d_text, cfg.token_budget);
  TrainData data = join_samples(labels, features);
  FitResult result = fit(data, nf.features, to_hyper(cfg), tax.fingerprint(),
                         config_to_json(cfg));
  write_checkpoint(out_path, result.checkpoint);
  std::cout << "wrote checkpoint to " << out_path << " (final loss "
            << (result.metrics.phase2_loss.empty() ? result.metrics.phase1_loss.back()
                                                   : result.metrics.phase2_loss.back())
            << ")\n";
  return 0;
}

int cmd_augment(const std::string& config_path, const std::string& tax_path,
                const std::string& ckpt_path, const std::string& labels_path,
                const std::string& out_path) {
  RunConfig cfg = load_config(config_path, std::nullopt);
  Taxonomy tax = load_taxonomy(resolve_taxonomy_path(tax_path, cfg));
  Checkpoint ckpt = read_checkpoint(ckpt_path);
  check_fingerprint(ckpt, tax);
  check_model_config(ckpt, cfg);
  auto labels = labels_from_jsonl(read_file(labels_path), tax);

  NodeFeatures nf = build_node_features(tax, cfg.d_text, cfg.token_budget);
  Eigen::MatrixXd c_l = language_corr(nf.features);
  Eigen::MatrixXd c_e = embedding_corr(node_embeddings(ckpt.params, ckpt.hyper, nf.features));
  CorrelationMatrix cm = combine_corr(c_l, c_e);
  if (cm.degenerate_language || cm.degenerate_embedding) {
    std::cerr << "warning: degenerate correlation component normalized to zero\n";
  }
  std::vector<PartialLabel> augmented;
  augmented.reserve(labels.size());
  for (const auto& y : labels) {
    PartialLabel a = pseudo_labels(y, cm.C);
    if (cfg.hard_pseudo_labels) a = harden_pseudo_labels(a, cfg.hard_pseudo_threshold);
    augmented.push_back(std::move(a));
  }
  atomic_write(out_path, labels_to_jsonl(augmented, tax));
  std::cout << "wrote " << augmented.size() << " augmented records to " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& tax_path,
             const std::string& ckpt_path, const std::string& labels_path,
             const std::string& features_path, const std::string& out_path,
             const std::string& train_labels_path) {
  RunConfig cfg = load_config(config_path, std::nullopt);
  Taxonomy tax = load_taxonomy(resolve_taxonomy_path(tax_path, cfg));
  Checkpoint ckpt = read_checkpoint(ckpt_path);
  check_fingerprint(ckpt, tax);
  check_model_config(ckpt, cfg);
  auto labels = labels_from_jsonl(read_file(labels_path), tax);
  FeatureFile features = read_features(features_path);
  NodeFeatures nf = build_node_features(tax, cfg.d_text, cfg.token_budget);
  TrainData data = join_samples(labels, features);

  Eigen::MatrixXd scores = infer(ckpt, nf.features, data.x);
  std::map<std::string, NodeEvalData> per_node = collect_leaf_eval(
      tax, scores, data.labels, cfg.unknown_eval_policy == "exclude");

  std::map<std::string, std::int64_t> counts;
  for (const auto& leaf : tax.leaf_ids()) counts[leaf] = 0;
  const auto count_labels = [&](const std::vector<PartialLabel>& ys) {
    for (const auto& y : ys) {
      for (const auto& leaf : tax.leaf_ids()) {
        if (y.values[static_cast<std::size_t>(tax.index_of(leaf))] == Label::Pos) ++counts[leaf];
      }
    }
  };
  if (!train_labels_path.empty()) {
    count_labels(labels_from_jsonl(read_file(train_labels_path), tax));
  } else {
    count_labels(data.labels);
  }
  auto [rare, non_rare] = split_rare(tax.leaf_ids(), counts, cfg.rare_threshold);

  EvalReport report = map_by_split(per_node, rare, non_rare);
  atomic_write(out_path, report_to_json(report));
  std::cout << "map_full " << report.map_full << " map_rare " << report.map_rare
            << " map_nonrare " << report.map_nonrare << " (skipped "
            << report.skipped_nodes.size() << " nodes)\n";
  return 0;
}

int cmd_infer(const std::string& config_path, const std::string& tax_path,
              const std::string& ckpt_path, const std::string& features_path,
              const std::string& out_path) {
  RunConfig cfg = load_config(config_path, std::nullopt);
  Taxonomy tax = load_taxonomy(resolve_taxonomy_path(tax_path, cfg));
  Checkpoint ckpt = read_checkpoint(ckpt_path);
  check_fingerprint(ckpt, tax);
  check_model_config(ckpt, cfg);
  FeatureFile features = read_features(features_path);
  NodeFeatures nf = build_node_features(tax, cfg.d_text, cfg.token_budget);

  Eigen::MatrixXd scores = infer(ckpt, nf.features, features.x);
  // Scores are written in the sample feature layout: one row per sample,
  // one column per node in canonical order.
  write_features(out_path, features.ids, scores.transpose());
  std::cout << "wrote scores for " << features.ids.size() << " samples to " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"structured verb-semantic space toolkit"};
  app.require_subcommand(1);

  std::string tax_path, config_path, out_path, manifest_path, mapping_path;
  std::string labels_path, features_path, ckpt_path, train_labels_path, node_id;
  bool allow_unmapped = false;
  std::optional<std::uint64_t> seed;

  auto* taxonomy_cmd = app.add_subcommand("taxonomy", "inspect and validate a taxonomy");
  taxonomy_cmd->require_subcommand(1);
  auto add_tax_opt = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--taxonomy", tax_path,
                                required ? "taxonomy document"
                                         : "taxonomy document (default: config taxonomy_path)");
    if (required) opt->required();
  };

  auto* validate_cmd = taxonomy_cmd->add_subcommand("validate", "check document invariants");
  add_tax_opt(validate_cmd);
  auto* show_cmd = taxonomy_cmd->add_subcommand("show", "print node and tree stats");
  show_cmd->add_option("id", node_id, "node id");
  add_tax_opt(show_cmd);
  auto* prompt_cmd = taxonomy_cmd->add_subcommand("prompt", "print the tree-position prompt");
  prompt_cmd->add_option("id", node_id, "node id")->required();
  add_tax_opt(prompt_cmd);

  auto* ingest_cmd = app.add_subcommand("ingest", "translate a manifest into partial labels");
  add_tax_opt(ingest_cmd, false);
  ingest_cmd->add_option("--manifest", manifest_path, "sample manifest (jsonl)")->required();
  ingest_cmd->add_option("--mapping", mapping_path, "class-node mapping (jsonl)")->required();
  ingest_cmd->add_option("--config", config_path, "run config (json)")->required();
  ingest_cmd->add_option("--out", out_path, "output label file")->required();
  ingest_cmd->add_flag("--allow-unmapped", allow_unmapped, "skip classes without a mapping");

  auto* train_cmd = app.add_subcommand("train", "fit the node classification model");
  train_cmd->add_option("--config", config_path)->required();
  add_tax_opt(train_cmd, false);
  train_cmd->add_option("--labels", labels_path, "partial labels (jsonl)")->required();
  train_cmd->add_option("--features", features_path, "sample features")->required();
  train_cmd->add_option("--out", out_path, "output checkpoint")->required();
  train_cmd->add_option("--seed", seed, "override config seed");

  auto* augment_cmd = app.add_subcommand("augment", "generate soft pseudo labels");
  augment_cmd->add_option("--config", config_path)->required();
  add_tax_opt(augment_cmd, false);
  augment_cmd->add_option("--checkpoint", ckpt_path, "phase-1 checkpoint")->required();
  augment_cmd->add_option("--labels", labels_path)->required();
  augment_cmd->add_option("--out", out_path)->required();

  auto* eval_cmd = app.add_subcommand("eval", "score a model on labeled samples");
  eval_cmd->add_option("--config", config_path)->required();
  add_tax_opt(eval_cmd, false);
  eval_cmd->add_option("--checkpoint", ckpt_path)->required();
  eval_cmd->add_option("--labels", labels_path, "ground-truth labels")->required();
  eval_cmd->add_option("--features", features_path)->required();
  eval_cmd->add_option("--out", out_path, "output report (json)")->required();
  eval_cmd->add_option("--train-labels", train_labels_path,
                       "labels used for the rare/non-rare sample counts");

  auto* infer_cmd = app.add_subcommand("infer", "write node probabilities for samples");
  infer_cmd->add_option("--config", config_path)->required();
  add_tax_opt(infer_cmd, false);
  infer_cmd->add_option("--checkpoint", ckpt_path)->required();
  infer_cmd->add_option("--features", features_path)->required();
  infer_cmd->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (validate_cmd->parsed()) return cmd_taxonomy_validate(tax_path);
    if (show_cmd->parsed()) return cmd_taxonomy_show(tax_path, node_id);
    if (prompt_cmd->parsed()) return cmd_taxonomy_prompt(tax_path, node_id);
    if (ingest_cmd->parsed()) {
      return cmd_ingest(tax_path, manifest_path, mapping_path, config_path, out_path,
                        allow_unmapped);
    }
    if (train_cmd->parsed()) {
      return cmd_train(config_path, tax_path, labels_path, features_path, out_path, seed);
    }
    if (augment_cmd->parsed()) {
      return cmd_augment(config_path, tax_path, ckpt_path, labels_path, out_path);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(config_path, tax_path, ckpt_path, labels_path, features_path, out_path,
                      train_labels_path);
    }
    if (infer_cmd->parsed()) {
      return cmd_infer(config_path, tax_path, ckpt_path, features_path, out_path);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace verbspace
