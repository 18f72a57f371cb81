#pragma once

#include <Eigen/Core>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "verbspace/eval.hpp"
#include "verbspace/harmonize.hpp"
#include "verbspace/model.hpp"
#include "verbspace/rng.hpp"
#include "verbspace/taxonomy.hpp"

namespace verbspace::testing {

/// Small fixture taxonomy with the chains used by the prompt goldens.
inline std::string fixture_taxonomy_json() {
  return R"({
  "format_version": 1,
  "nodes": [
    {"id": "20", "gloss": "contact"},
    {"id": "touch-20", "parent": "20"},
    {"id": "touch-20-1", "parent": "touch-20",
     "members": [
       {"lemma": "hold", "wordnet": ["hold%2:35:00"], "framenet": ["Manipulation"]},
       "grasp", "massage", "pat", "nudge"],
     "examples": ["She held the rail firmly."],
     "definitions": ["make physical contact with an entity"]},
    {"id": "9", "gloss": "putting"},
    {"id": "put-9.1", "parent": "9"},
    {"id": "put-9.1.1", "parent": "put-9.1",
     "members": ["apply", "insert", "install"],
     "examples": ["He inserted the coin into the slot."]},
    {"id": "10", "gloss": "removing"},
    {"id": "banish-10.2", "parent": "10", "members": ["banish", "deport"]},
    {"id": "wipe-10.4", "parent": "10", "members": ["wipe", "scrub", "erase"]}
  ]
})";
}

inline Taxonomy fixture_taxonomy() { return parse_taxonomy(fixture_taxonomy_json()); }

inline const char* kTouchPrompt =
    "The node is touch-20-1. Its ancestors are touch-20, 20: contact, and root. "
    "Its descendants are none.";

/// Random tree document over n nodes (ids n1..n), each parented on an
/// earlier node or the root.
inline std::string random_taxonomy_json(int n, RngStream& rng) {
  std::string doc = "{\"format_version\": 1, \"nodes\": [";
  for (int i = 1; i <= n; ++i) {
    if (i > 1) doc += ", ";
    std::string parent = "root";
    if (i > 1 && rng.uniform01() < 0.8) {
      parent = "n" + std::to_string(1 + rng.next_below(static_cast<std::uint64_t>(i - 1)));
    }
    doc += "{\"id\": \"n" + std::to_string(i) + "\", \"parent\": \"" + parent + "\"}";
  }
  doc += "]}";
  return doc;
}

/// Unique scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("verbspace-" + tag + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Synthetic benchmark: a 3-level taxonomy with Gaussian cluster features.
// Sibling leaves share a family token so language correlations are
// informative.
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  int groups = 4;
  int leaves_per_group = 3;  // 12 leaves by default
  int feat_dim = 60;
  double mean_scale = 4.0;
  double noise = 1.0;
  int train_per_leaf = 200;
  int test_per_leaf = 50;
  bool label_ancestors = true;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Taxonomy tax;
  std::vector<std::string> leaf_order;  // generation order
  Eigen::MatrixXd train_x, test_x;      // feat_dim x count
  std::vector<std::string> train_ids, test_ids;
  std::vector<PartialLabel> train_y, test_y;
  std::map<std::string, std::int64_t> train_counts;  // positives per leaf
};

inline std::string synthetic_taxonomy_json(const SyntheticSpec& spec) {
  std::string doc = "{\"format_version\": 1, \"nodes\": [";
  bool first = true;
  auto add = [&](const std::string& body) {
    if (!first) doc += ", ";
    first = false;
    doc += body;
  };
  for (int g = 0; g < spec.groups; ++g) {
    const std::string gid = "g" + std::to_string(g);
    add("{\"id\": \"" + gid + "\", \"gloss\": \"family " + std::to_string(g) + "\"}");
    for (int l = 0; l < spec.leaves_per_group; ++l) {
      const std::string lid = gid + "-leaf" + std::to_string(l);
      add("{\"id\": \"" + lid + "\", \"parent\": \"" + gid +
          "\", \"members\": [\"verb" + std::to_string(g) + "x" + std::to_string(l) +
          "\", \"family" + std::to_string(g) + "\"], \"definitions\": [\"variant " +
          std::to_string(l) + " of family " + std::to_string(g) + " motion\"]}");
    }
  }
  doc += "]}";
  return doc;
}

inline SyntheticData make_synthetic(const SyntheticSpec& spec) {
  SyntheticData data;
  data.tax = parse_taxonomy(synthetic_taxonomy_json(spec));
  for (int g = 0; g < spec.groups; ++g) {
    for (int l = 0; l < spec.leaves_per_group; ++l) {
      data.leaf_order.push_back("g" + std::to_string(g) + "-leaf" + std::to_string(l));
    }
  }
  const int n_leaves = static_cast<int>(data.leaf_order.size());
  const int n_nodes = data.tax.size();

  RngStream means(spec.seed, "synthetic/means");
  Eigen::MatrixXd mu(spec.feat_dim, n_leaves);
  for (int l = 0; l < n_leaves; ++l) {
    for (int i = 0; i < spec.feat_dim; ++i) mu(i, l) = means.normal();
    mu.col(l) *= spec.mean_scale / mu.col(l).norm();
  }

  auto fill = [&](int per_leaf, const std::string& tag, Eigen::MatrixXd& x,
                  std::vector<std::string>& ids, std::vector<PartialLabel>& ys) {
    RngStream noise(spec.seed, "synthetic/noise/" + tag);
    x.resize(spec.feat_dim, per_leaf * n_leaves);
    int col = 0;
    for (int l = 0; l < n_leaves; ++l) {
      const std::string& leaf = data.leaf_order[static_cast<std::size_t>(l)];
      for (int s = 0; s < per_leaf; ++s, ++col) {
        for (int i = 0; i < spec.feat_dim; ++i) {
          x(i, col) = mu(i, l) + spec.noise * noise.normal();
        }
        PartialLabel y;
        y.sample_id = tag + "-" + leaf + "-" + std::to_string(s);
        ids.push_back(y.sample_id);
        y.values.assign(static_cast<std::size_t>(n_nodes), Label::Neg);
        y.values[static_cast<std::size_t>(data.tax.index_of(leaf))] = Label::Pos;
        if (spec.label_ancestors) {
          for (const auto& anc : data.tax.ancestors(leaf)) {
            y.values[static_cast<std::size_t>(data.tax.index_of(anc))] = Label::Pos;
          }
        }
        ys.push_back(std::move(y));
      }
    }
  };
  fill(spec.train_per_leaf, "train", data.train_x, data.train_ids, data.train_y);
  fill(spec.test_per_leaf, "test", data.test_x, data.test_ids, data.test_y);
  for (const auto& leaf : data.leaf_order) {
    data.train_counts[leaf] = spec.train_per_leaf;
  }
  return data;
}

/// Remove a fraction of the positive entries (set them Unknown), mimicking
/// errors of omission in harvested labels.
inline std::vector<PartialLabel> remove_positives(const std::vector<PartialLabel>& labels,
                                                  double fraction, std::uint64_t seed) {
  RngStream rng(seed, "synthetic/corrupt");
  std::vector<PartialLabel> out = labels;
  for (auto& y : out) {
    for (auto& v : y.values) {
      if (v == Label::Pos && rng.uniform01() < fraction) v = Label::Unknown;
    }
  }
  return out;
}

/// Leaf-protocol mAP of score rows against labels (unknown counted
/// negative), with the rare/non-rare split taken from the given counts.
inline double leaf_map_full(const Taxonomy& tax, const Eigen::MatrixXd& scores,
                            const std::vector<PartialLabel>& labels,
                            const std::map<std::string, std::int64_t>& counts,
                            std::int64_t threshold) {
  std::map<std::string, NodeEvalData> per_node;
  for (const auto& leaf : tax.leaf_ids()) {
    const int idx = tax.index_of(leaf);
    NodeEvalData nd;
    for (std::size_t s = 0; s < labels.size(); ++s) {
      nd.scores.push_back(scores(static_cast<Eigen::Index>(s), idx));
      nd.labels.push_back(
          labels[s].values[static_cast<std::size_t>(idx)] == Label::Pos ? 1 : 0);
    }
    per_node[leaf] = std::move(nd);
  }
  auto [rare, non_rare] = split_rare(tax.leaf_ids(), counts, threshold);
  return map_by_split(per_node, rare, non_rare).map_full;
}

struct GradCheckResult {
  double max_rel_err = 0.0;
  Eigen::Index worst = -1;
};

/// Central finite differences over every parameter against the analytic
/// gradient of the total batch loss.
inline GradCheckResult gradient_check(const ModelParams& params, const HyperParams& hp,
                                      const Eigen::MatrixXd& x,
                                      const std::vector<PartialLabel>& ys, int phase,
                                      const Eigen::MatrixXd& node_feats, double step) {
  std::vector<const PartialLabel*> ptrs;
  for (const auto& y : ys) ptrs.push_back(&y);

  BatchGradients grads;
  batch_loss(params, hp, x, ptrs, phase, node_feats, &grads);
  const Vec analytic = flatten_grads(grads);
  const Vec flat = flatten_params(params);

  GradCheckResult result;
  ModelParams work = params;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    Vec probe = flat;
    probe[i] = flat[i] + step;
    unflatten_params(work, probe);
    const double up = batch_loss(work, hp, x, ptrs, phase, node_feats, nullptr).total;
    probe[i] = flat[i] - step;
    unflatten_params(work, probe);
    const double dn = batch_loss(work, hp, x, ptrs, phase, node_feats, nullptr).total;
    const double fd = (up - dn) / (2.0 * step);
    const double rel = std::abs(analytic[i] - fd) /
                       std::max({std::abs(analytic[i]), std::abs(fd), 1e-6});
    if (rel > result.max_rel_err) {
      result.max_rel_err = rel;
      result.worst = i;
    }
  }
  return result;
}

}  // namespace verbspace::testing
