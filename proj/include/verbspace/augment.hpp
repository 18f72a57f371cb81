#pragma once

#include <Eigen/Core>

#include <vector>

#include "verbspace/harmonize.hpp"
#include "verbspace/lorentz.hpp"

namespace verbspace {

/// Node co-relation matrix C = (norm(C_L) + norm(C_E)) / 2, where norm is
/// global min-max normalization of the off-diagonal entries into [0, 1].
/// The raw components are retained for audit; a degenerate (constant)
/// component normalizes to all zeros.
struct CorrelationMatrix {
  Eigen::MatrixXd C;
  Eigen::MatrixXd C_L;
  Eigen::MatrixXd C_E;
  bool degenerate_language = false;
  bool degenerate_embedding = false;
};

/// C_L[i][j] = cosine(l_i, l_j) over node feature columns.
/// Throws ZeroVector on a zero-norm column.
Eigen::MatrixXd language_corr(const Eigen::MatrixXd& node_features);

/// C_E[i][j] = -d_L(e_i, e_j) over trained node embeddings; the diagonal
/// (-0) is the maximum entry.
Eigen::MatrixXd embedding_corr(const std::vector<LorentzPoint<double>>& embeddings);

/// Min-max normalize each component over its off-diagonal entries, then
/// average. Throws ShapeMismatch.
CorrelationMatrix combine_corr(const Eigen::MatrixXd& c_language,
                               const Eigen::MatrixXd& c_embedding);

/// Soft pseudo labels for unknown entries:
/// y'_i = sum_{j : y_j = Pos, j != i} C(i, j), clamped to [0, 1], summed in
/// ascending j order for bit-reproducibility. Pos/Neg entries are untouched
/// (their soft slot is 0). Returns a copy of the label with soft filled.
PartialLabel pseudo_labels(const PartialLabel& label, const Eigen::MatrixXd& C);

/// Optional hard thresholding of soft values into {0, 1}.
PartialLabel harden_pseudo_labels(const PartialLabel& label, double threshold);

}  // namespace verbspace
