#include "verbspace/eval.hpp"

#include <algorithm>
#include <numeric>

#include "verbspace/errors.hpp"
#include "verbspace/taxonomy.hpp"

namespace verbspace {

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatch("average_precision: scores/labels length mismatch");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  // Precision at each positive, accumulated in original index order so the
  // result is reproducible independently of the ranking permutation.
  std::vector<double> precision_at(n, 0.0);
  double positives_seen = 0.0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (labels[order[rank]] == 1) {
      positives_seen += 1.0;
      precision_at[order[rank]] = positives_seen / static_cast<double>(rank + 1);
    }
  }
  if (positives_seen == 0.0) throw NoPositives("average_precision: no positive labels");
  double precision_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1) precision_sum += precision_at[i];
  }
  return precision_sum / positives_seen;
}

EvalReport map_by_split(const std::map<std::string, NodeEvalData>& per_node,
                        const std::set<std::string>& rare,
                        const std::set<std::string>& non_rare) {
  for (const auto& id : rare) {
    if (non_rare.count(id)) throw SplitOverlap("map_by_split: node " + id + " in both splits");
  }
  EvalReport report;
  double sum_rare = 0.0, sum_nonrare = 0.0;
  int n_rare = 0, n_nonrare = 0;
  for (const auto& [id, data] : per_node) {
    const bool is_rare = rare.count(id) > 0;
    if (!is_rare && !non_rare.count(id)) {
      throw SplitOverlap("map_by_split: node " + id + " is in neither split");
    }
    bool any_pos = std::any_of(data.labels.begin(), data.labels.end(),
                               [](int y) { return y == 1; });
    if (!any_pos) {
      report.skipped_nodes.push_back(id);
      continue;
    }
    const double ap = average_precision(data.scores, data.labels);
    report.per_node_ap[id] = ap;
    if (is_rare) {
      sum_rare += ap;
      ++n_rare;
    } else {
      sum_nonrare += ap;
      ++n_nonrare;
    }
  }
  report.map_rare = n_rare ? sum_rare / n_rare : 0.0;
  report.map_nonrare = n_nonrare ? sum_nonrare / n_nonrare : 0.0;
  const int total = n_rare + n_nonrare;
  report.map_full = total ? (sum_rare + sum_nonrare) / total : 0.0;
  return report;
}

std::map<std::string, NodeEvalData> collect_leaf_eval(
    const Taxonomy& tax, const Eigen::MatrixXd& score_rows,
    const std::vector<PartialLabel>& labels, bool exclude_unknown) {
  if (score_rows.rows() != static_cast<Eigen::Index>(labels.size()) ||
      score_rows.cols() != tax.size()) {
    throw DimensionMismatch("collect_leaf_eval: score shape mismatch");
  }
  std::map<std::string, NodeEvalData> per_node;
  for (const auto& leaf : tax.leaf_ids()) {
    const int idx = tax.index_of(leaf);
    NodeEvalData nd;
    for (std::size_t s = 0; s < labels.size(); ++s) {
      const Label v = labels[s].values[static_cast<std::size_t>(idx)];
      if (v == Label::Unknown && exclude_unknown) continue;
      nd.scores.push_back(score_rows(static_cast<Eigen::Index>(s), idx));
      nd.labels.push_back(v == Label::Pos ? 1 : 0);
    }
    per_node[leaf] = std::move(nd);
  }
  return per_node;
}

double topk_accuracy(const Eigen::MatrixXd& score_rows,
                     const std::vector<int>& labels, int k) {
  if (score_rows.rows() == 0 || score_rows.cols() == 0 || labels.empty()) {
    throw EmptyInput("topk_accuracy: empty input");
  }
  if (score_rows.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DimensionMismatch("topk_accuracy: rows/labels mismatch");
  }
  if (k < 1) throw Error("topk_accuracy: k must be >= 1");
  const Eigen::Index classes = score_rows.cols();
  int hits = 0;
  for (Eigen::Index r = 0; r < score_rows.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= classes) throw LabelOutOfRange("topk_accuracy: label out of range");
    // Rank of the true label = number of entries strictly better under
    // (score desc, index asc).
    int better = 0;
    for (Eigen::Index c = 0; c < classes; ++c) {
      if (c == y) continue;
      if (score_rows(r, c) > score_rows(r, y) ||
          (score_rows(r, c) == score_rows(r, y) && c < y)) {
        ++better;
      }
    }
    if (better < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(score_rows.rows());
}

Eigen::VectorXd fuse_scores(const Eigen::VectorXd& logits_2d,
                            const std::vector<Eigen::VectorXd>& logits_3d) {
  if (logits_3d.empty()) return logits_2d;
  Eigen::VectorXd pooled = logits_3d.front();
  if (pooled.size() != logits_2d.size()) {
    throw DimensionMismatch("fuse_scores: 3d logits dimension mismatch");
  }
  for (std::size_t i = 1; i < logits_3d.size(); ++i) {
    if (logits_3d[i].size() != logits_2d.size()) {
      throw DimensionMismatch("fuse_scores: 3d logits dimension mismatch");
    }
    pooled = pooled.cwiseMax(logits_3d[i]);
  }
  return (logits_2d + pooled) / 2.0;
}

}  // namespace verbspace
