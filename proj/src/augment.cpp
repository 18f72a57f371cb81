#include "verbspace/augment.hpp"

#include <algorithm>
#include <limits>

#include "verbspace/errors.hpp"

namespace verbspace {

Eigen::MatrixXd language_corr(const Eigen::MatrixXd& node_features) {
  const Eigen::Index n = node_features.cols();
  Eigen::VectorXd norms(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    norms[i] = node_features.col(i).norm();
    if (norms[i] == 0.0) {
      throw ZeroVector("language_corr: node feature column " + std::to_string(i) +
                       " has zero norm");
    }
  }
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = node_features.col(i).dot(node_features.col(j)) / (norms[i] * norms[j]);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

Eigen::MatrixXd embedding_corr(const std::vector<LorentzPoint<double>>& embeddings) {
  const Eigen::Index n = static_cast<Eigen::Index>(embeddings.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = -lorentz_distance(embeddings[static_cast<std::size_t>(i)],
                                         embeddings[static_cast<std::size_t>(j)]);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

namespace {

/// Min-max over off-diagonal entries, affine-mapped into [0, 1] and clamped;
/// a constant off-diagonal collapses the whole matrix to zero.
Eigen::MatrixXd minmax_offdiag(const Eigen::MatrixXd& m, bool* degenerate) {
  const Eigen::Index n = m.rows();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      lo = std::min(lo, m(i, j));
      hi = std::max(hi, m(i, j));
    }
  }
  *degenerate = !(hi - lo > 0.0);
  if (n < 2 || *degenerate) return Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd out = (m.array() - lo) / (hi - lo);
  return out.array().min(1.0).max(0.0);
}

}  // namespace

CorrelationMatrix combine_corr(const Eigen::MatrixXd& c_language,
                               const Eigen::MatrixXd& c_embedding) {
  if (c_language.rows() != c_embedding.rows() || c_language.cols() != c_embedding.cols() ||
      c_language.rows() != c_language.cols()) {
    throw ShapeMismatch("combine_corr: components must be square with equal shape");
  }
  CorrelationMatrix cm;
  cm.C_L = c_language;
  cm.C_E = c_embedding;
  Eigen::MatrixXd nl = minmax_offdiag(c_language, &cm.degenerate_language);
  Eigen::MatrixXd ne = minmax_offdiag(c_embedding, &cm.degenerate_embedding);
  cm.C = (nl + ne) / 2.0;
  return cm;
}

PartialLabel pseudo_labels(const PartialLabel& label, const Eigen::MatrixXd& C) {
  const Eigen::Index n = static_cast<Eigen::Index>(label.values.size());
  if (C.rows() != n || C.cols() != n) {
    throw ShapeMismatch("pseudo_labels: C is " + std::to_string(C.rows()) + "x" +
                        std::to_string(C.cols()) + " but label has " + std::to_string(n) +
                        " nodes");
  }
  PartialLabel out = label;
  out.has_soft = true;
  out.soft = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (label.values[static_cast<std::size_t>(i)] != Label::Unknown) continue;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (label.values[static_cast<std::size_t>(j)] == Label::Pos) acc += C(i, j);
    }
    out.soft[i] = std::clamp(acc, 0.0, 1.0);
  }
  return out;
}

PartialLabel harden_pseudo_labels(const PartialLabel& label, double threshold) {
  PartialLabel out = label;
  if (!out.has_soft) return out;
  for (Eigen::Index i = 0; i < out.soft.size(); ++i) {
    if (out.values[static_cast<std::size_t>(i)] != Label::Unknown) continue;
    out.soft[i] = out.soft[i] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace verbspace
