#pragma once

#include <Eigen/Core>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "verbspace/harmonize.hpp"
#include "verbspace/taxonomy.hpp"

namespace verbspace {

/// Mean of precision-at-each-positive over the score-descending ranking;
/// score ties break toward the lower index. Throws NoPositives.
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels);

struct NodeEvalData {
  std::vector<double> scores;
  std::vector<int> labels;  // 0/1
};

struct EvalReport {
  std::map<std::string, double> per_node_ap;  // non-skipped nodes only
  double map_full = 0.0;
  double map_rare = 0.0;
  double map_nonrare = 0.0;
  std::vector<std::string> skipped_nodes;  // nodes with no positives
};

/// Mean AP per split; nodes with no positives are skipped and reported,
/// not counted as zero. map_full is the mean over all non-skipped nodes,
/// which equals the count-weighted mean of the split means. Throws
/// SplitOverlap when the splits intersect.
EvalReport map_by_split(const std::map<std::string, NodeEvalData>& per_node,
                        const std::set<std::string>& rare,
                        const std::set<std::string>& non_rare);

/// Assemble per-leaf score/label pairs from score rows (one row per
/// sample, node columns in canonical order). Unknown entries count as
/// negatives by default; with exclude_unknown they drop out of that
/// node's ranking instead.
std::map<std::string, NodeEvalData> collect_leaf_eval(
    const Taxonomy& tax, const Eigen::MatrixXd& score_rows,
    const std::vector<PartialLabel>& labels, bool exclude_unknown = false);

/// Fraction of rows whose true label ranks among the top-k scores; ties
/// break toward the lower index. Throws EmptyInput.
double topk_accuracy(const Eigen::MatrixXd& score_rows,
                     const std::vector<int>& labels, int k);

/// Late fusion: elementwise max over per-human 3D logits, then elementwise
/// mean with the 2D logits. An empty 3D list returns the 2D logits
/// unchanged. Throws DimensionMismatch.
Eigen::VectorXd fuse_scores(const Eigen::VectorXd& logits_2d,
                            const std::vector<Eigen::VectorXd>& logits_3d);

}  // namespace verbspace
