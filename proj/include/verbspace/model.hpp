#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "verbspace/harmonize.hpp"
#include "verbspace/lorentz.hpp"

namespace verbspace {

/// Multi-modal sample feature.
struct FeatureVector {
  std::string sample_id;
  std::string modality = "2d";  // "2d" | "3d"
  Vec vector;
};

struct HyperParams {
  double c = 1.0;
  double K = 0.1;
  double gamma = 1.0;   // score scaling factor
  double omega = 0.01;  // entailment loss weight
  double lr = 0.1;
  int warmup_epochs = 2;
  int epochs_phase1 = 50;
  int epochs_phase2 = 0;
  int batch_size = 64;
  int embed_dim = 16;   // n
  int head_hidden = 0;  // 0 = single affine heads
  bool disentangle = true;
  bool hard_pseudo = false;
  double hard_pseudo_threshold = 0.5;
  std::uint64_t seed = 0;

  Curvature<double> curvature() const { return {c, K}; }
};

/// Trainable state: per-node disentangling heads, the shared projection
/// from text features to pre-map node vectors, and log modality scales
/// (kept in log space so the scales stay positive).
struct ModelParams {
  int num_nodes = 0;   // N
  int feat_dim = 0;    // d
  int embed_dim = 0;   // n
  int text_dim = 0;    // d_text
  int hidden = 0;      // h
  bool disentangle = true;

  // Head stacks: R = disentangle ? N : 1 blocks of rows.
  Eigen::MatrixXd head_w;   // (R * (hidden ? h : n)) x d
  Eigen::VectorXd head_b;
  Eigen::MatrixXd head_w2;  // hidden ? (R * n) x h : empty
  Eigen::VectorXd head_b2;
  Eigen::MatrixXd proj;     // n x d_text
  double rho_img = 0.0;
  double rho_txt = 0.0;

  double omega_img() const { return std::exp(rho_img); }
  double omega_txt() const { return std::exp(rho_txt); }
};

ModelParams init_params(const HyperParams& hp, int num_nodes, int feat_dim,
                        int embed_dim, int text_dim);

// Flat parameter views, used by finite-difference checks.
Eigen::Index param_count(const ModelParams& p);
Vec flatten_params(const ModelParams& p);
void unflatten_params(ModelParams& p, const Vec& flat);

struct BatchGradients {
  Eigen::MatrixXd head_w;
  Eigen::VectorXd head_b;
  Eigen::MatrixXd head_w2;
  Eigen::VectorXd head_b2;
  Eigen::MatrixXd proj;
  double rho_img = 0.0;
  double rho_txt = 0.0;
};
Vec flatten_grads(const BatchGradients& g);

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;
  double ent = 0.0;
};

/// Node-specific representations v_i = f_i(v_raw), one column per node.
/// Throws DimensionMismatch.
Eigen::MatrixXd disentangle(const ModelParams& p, const Vec& v_raw);

/// Pre-map node vectors proj * l_i scaled by omega_txt and lifted onto the
/// hyperboloid.
std::vector<LorentzPoint<double>> node_embeddings(const ModelParams& p,
                                                  const HyperParams& hp,
                                                  const Eigen::MatrixXd& node_feats);

/// probs_i = sigmoid(-gamma * d_L(v_i, e_i)); in (0, 0.5] since d_L >= 0.
Vec node_scores(const std::vector<LorentzPoint<double>>& v_points,
                const std::vector<LorentzPoint<double>>& e_points, double gamma);

/// Mean binary cross-entropy over nodes. Phase 1 treats Unknown as
/// negative; phase 2 uses the label's soft value (throws MissingPseudo
/// when absent).
double classification_loss(const Vec& scores, const PartialLabel& y, int phase);

/// Mean entailment violation over certain positives only; 0 when the
/// sample has none. Degenerate pairs (child at the apex, apex at the
/// origin) count as zero violation.
double entailment_loss(const std::vector<LorentzPoint<double>>& v_points,
                       const std::vector<LorentzPoint<double>>& e_points,
                       const PartialLabel& y);

double total_loss(double cls, double ent, double omega);

/// Total loss (classification + omega * entailment) averaged over a batch,
/// with analytic gradients for every parameter when grads != nullptr.
/// Gradients accumulate in batch-index order, so results are reproducible.
LossBreakdown batch_loss(const ModelParams& p, const HyperParams& hp,
                         const Eigen::MatrixXd& batch_x,
                         const std::vector<const PartialLabel*>& batch_y,
                         int phase, const Eigen::MatrixXd& node_feats,
                         BatchGradients* grads);

struct TrainData {
  std::vector<std::string> ids;
  Eigen::MatrixXd x;  // d x B, column per sample
  std::vector<PartialLabel> labels;
};

struct Checkpoint {
  std::uint32_t version = 1;
  std::uint64_t taxonomy_fingerprint = 0;
  std::string config_echo;
  HyperParams hyper;
  ModelParams params;
};

struct FitMetrics {
  // Full-dataset loss before training (index 0) and after each epoch.
  std::vector<double> phase1_loss;
  std::vector<double> phase2_loss;
};

struct FitResult {
  Checkpoint checkpoint;
  FitMetrics metrics;
};

/// Two-phase training. Phase 1 runs assume-negative SGD for
/// epochs_phase1; when epochs_phase2 > 0, unknown entries get soft pseudo
/// labels (taken from the labels when present, otherwise generated from
/// the co-relation matrix of node features and the phase-1 embeddings)
/// and training continues. Deterministic given the seed.
/// Throws ConfigMismatch, NonFiniteLoss.
FitResult fit(const TrainData& data, const Eigen::MatrixXd& node_feats,
              const HyperParams& hp, std::uint64_t taxonomy_fingerprint,
              const std::string& config_echo);

/// Per-sample node probabilities, one row per column of x.
Eigen::MatrixXd infer(const Checkpoint& ckpt, const Eigen::MatrixXd& node_feats,
                      const Eigen::MatrixXd& x);

// ---------------------------------------------------------------------------
// Transfer head: node scores -> downstream action scores
// ---------------------------------------------------------------------------

struct TransferHead {
  Eigen::MatrixXd w;  // A x N
  Eigen::VectorXd b;  // A
};

struct TransferParams {
  double lr = 0.5;
  int epochs = 500;
};

/// Single affine layer trained by full-batch gradient descent on softmax
/// cross-entropy; the node model is untouched. Throws LabelOutOfRange.
TransferHead fit_transfer_head(const Eigen::MatrixXd& node_score_rows,
                               const std::vector<int>& action_labels,
                               int num_actions, const TransferParams& tp = {});

/// Softmax action probabilities, one row per input row.
Eigen::MatrixXd predict_actions(const TransferHead& head,
                                const Eigen::MatrixXd& node_score_rows);

// ---------------------------------------------------------------------------
// Entailment geometry gradients (shared with embedding-only training)
// ---------------------------------------------------------------------------

struct PairGrad {
  double violation = 0.0;
  Vec d_apex;   // d violation / d apex tangent
  Vec d_child;  // d violation / d child tangent
};

/// Violation of the cone at exp_map0(apex_tangent) by
/// exp_map0(child_tangent), with gradients w.r.t. both tangent vectors.
/// Gradients are zero wherever the hinge or a clamp is inactive.
PairGrad entailment_pair_grad(const Vec& apex_tangent, const Vec& child_tangent,
                              Curvature<double> curv);

}  // namespace verbspace
