#include "verbspace/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "verbspace/augment.hpp"
#include "verbspace/errors.hpp"
#include "verbspace/rng.hpp"

namespace verbspace {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kClampTiny = 1e-12;

double sigmoid_nonpos(double z) {
  // z <= 0 throughout: scores are sigmoid(-gamma * d) with d >= 0.
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

double target_value(const PartialLabel& y, Eigen::Index i, int phase) {
  switch (y.values[static_cast<std::size_t>(i)]) {
    case Label::Pos:
      return 1.0;
    case Label::Neg:
      return 0.0;
    case Label::Unknown:
    default:
      if (phase == 1) return 0.0;  // assume negative
      if (!y.has_soft) {
        throw MissingPseudo("phase 2 requires soft pseudo labels for unknown entries (sample " +
                            y.sample_id + ")");
      }
      return y.soft[i];
  }
}

struct CachedPoint {
  Vec u;  // tangent after modality scaling
  LorentzPoint<double> p;
};

CachedPoint lift(const Vec& u, Curvature<double> curv) {
  return {u, exp_map0(u, curv)};
}

/// Distance d_L with cotangents on both raw points for a unit upstream
/// gradient; inactive (zero gradient) inside the acosh clamp.
struct DistFB {
  double dist = 0.0;
  bool active = false;
  double dq = 0.0;  // d dist / d (x, y)_L
};

DistFB distance_fb(const LorentzPoint<double>& x, const LorentzPoint<double>& y) {
  DistFB fb;
  const double c = x.curv.c;
  const double q = x.space.dot(y.space) - x.time * y.time;
  const double a = -c * q;
  if (a <= 1.0) {
    fb.dist = 0.0;
    return fb;
  }
  fb.dist = std::sqrt(1.0 / c) * std::acosh(a);
  if (a > 1.0 + kClampTiny) {
    fb.active = true;
    fb.dq = -std::sqrt(c) / std::sqrt(a * a - 1.0);
  }
  return fb;
}

/// Entailment violation at apex e by child x, with cotangents on the raw
/// point coordinates for a unit upstream gradient. Degenerate
/// configurations (apex at origin, coincident pair, inactive hinge)
/// report zero violation and stay inactive.
struct EntailFB {
  double violation = 0.0;
  bool active = false;
  Vec de_space, dx_space;
  double de_time = 0.0, dx_time = 0.0;
};

EntailFB entail_fb(const LorentzPoint<double>& e, const LorentzPoint<double>& x,
                   bool want_grads) {
  EntailFB fb;
  const double c = e.curv.c;
  const double K = e.curv.K;
  const double r = e.space.norm();
  if (r == 0.0) return fb;
  const double q = e.space.dot(x.space) - e.time * x.time;
  if (!(q < -1.0 / c - kClampTiny)) return fb;  // coincident: inside the cone

  const double b = c * q;
  const double d2 = b * b - 1.0;
  const double dd = std::sqrt(d2);
  const double numer = x.time + e.time * b;
  const double a_raw = numer / (r * dd);
  const double theta = std::atan2(std::sqrt(c * detail::gram_det(e.space, x.space)), numer);
  const double w_raw = 2.0 * K / (std::sqrt(c) * r);
  const double alpha = std::asin(std::min(1.0, w_raw));
  const double viol = theta - alpha;
  if (viol <= 0.0) return fb;
  fb.violation = viol;
  fb.active = true;
  if (!want_grads) return fb;

  fb.de_space = Vec::Zero(e.space.size());
  fb.dx_space = Vec::Zero(e.space.size());
  double dr = 0.0;
  if (std::abs(a_raw) < 1.0 - kClampTiny) {
    const double da = -1.0 / std::sqrt(1.0 - a_raw * a_raw);  // d theta / d a
    fb.dx_time += da / (r * dd);
    fb.de_time += da * b / (r * dd);
    const double db = da * (e.time / (r * dd) - a_raw * b / d2);
    const double dq = db * c;
    dr += da * (-a_raw / r);
    fb.de_space += dq * x.space;
    fb.dx_space += dq * e.space;
    fb.de_time += -dq * x.time;
    fb.dx_time += -dq * e.time;
  }
  if (w_raw < 1.0 - kClampTiny) {
    // d(-alpha)/dr = +2K / (sqrt(c) r^2 sqrt(1 - w^2))
    dr += 2.0 * K / (std::sqrt(c) * r * r * std::sqrt(1.0 - w_raw * w_raw));
  }
  fb.de_space += (dr / r) * e.space;
  return fb;
}

}  // namespace

ModelParams init_params(const HyperParams& hp, int num_nodes, int feat_dim,
                        int embed_dim, int text_dim) {
  ModelParams p;
  p.num_nodes = num_nodes;
  p.feat_dim = feat_dim;
  p.embed_dim = embed_dim;
  p.text_dim = text_dim;
  p.hidden = hp.head_hidden;
  p.disentangle = hp.disentangle;

  const int blocks = p.disentangle ? num_nodes : 1;
  const int out1 = p.hidden ? p.hidden : embed_dim;

  RngStream heads(hp.seed, "init/heads");
  p.head_w.resize(blocks * out1, feat_dim);
  const double w_std = 1.0 / std::sqrt(static_cast<double>(feat_dim));
  for (Eigen::Index i = 0; i < p.head_w.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.head_w.cols(); ++j) {
      p.head_w(i, j) = w_std * heads.normal();
    }
  }
  p.head_b = Vec::Zero(blocks * out1);
  if (p.hidden) {
    p.head_w2.resize(blocks * embed_dim, p.hidden);
    const double w2_std = 1.0 / std::sqrt(static_cast<double>(p.hidden));
    for (Eigen::Index i = 0; i < p.head_w2.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.head_w2.cols(); ++j) {
        p.head_w2(i, j) = w2_std * heads.normal();
      }
    }
    p.head_b2 = Vec::Zero(blocks * embed_dim);
  }

  RngStream proj(hp.seed, "init/proj");
  p.proj.resize(embed_dim, text_dim);
  for (Eigen::Index i = 0; i < p.proj.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.proj.cols(); ++j) {
      p.proj(i, j) = proj.normal();
    }
  }

  // Scales start at sqrt(1/n) so scaled vectors have expected unit norm.
  p.rho_img = -0.5 * std::log(static_cast<double>(embed_dim));
  p.rho_txt = -0.5 * std::log(static_cast<double>(embed_dim));
  return p;
}

Eigen::Index param_count(const ModelParams& p) {
  return p.head_w.size() + p.head_b.size() + p.head_w2.size() + p.head_b2.size() +
         p.proj.size() + 2;
}

namespace {

template <typename F>
void for_each_block(ModelParams& p, F&& f) {
  f(p.head_w);
  f(p.head_b);
  f(p.head_w2);
  f(p.head_b2);
  f(p.proj);
}

}  // namespace

Vec flatten_params(const ModelParams& p) {
  Vec flat(param_count(p));
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) flat[at++] = m(i, j);
    }
  };
  put(p.head_w);
  put(p.head_b);
  put(p.head_w2);
  put(p.head_b2);
  put(p.proj);
  flat[at++] = p.rho_img;
  flat[at++] = p.rho_txt;
  return flat;
}

void unflatten_params(ModelParams& p, const Vec& flat) {
  if (flat.size() != param_count(p)) {
    throw DimensionMismatch("unflatten_params: flat vector has wrong size");
  }
  Eigen::Index at = 0;
  for_each_block(p, [&](auto& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = flat[at++];
    }
  });
  p.rho_img = flat[at++];
  p.rho_txt = flat[at++];
}

Vec flatten_grads(const BatchGradients& g) {
  Eigen::Index total = g.head_w.size() + g.head_b.size() + g.head_w2.size() +
                       g.head_b2.size() + g.proj.size() + 2;
  Vec flat(total);
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) flat[at++] = m(i, j);
    }
  };
  put(g.head_w);
  put(g.head_b);
  put(g.head_w2);
  put(g.head_b2);
  put(g.proj);
  flat[at++] = g.rho_img;
  flat[at++] = g.rho_txt;
  return flat;
}

namespace {

/// Head forward for a batch. Returns V stacked ((disentangle ? N : 1) * n
/// rows) and, for hidden heads, the tanh activations needed by backward.
struct HeadForward {
  Eigen::MatrixXd v;
  Eigen::MatrixXd h;  // empty when hidden == 0
};

HeadForward head_forward(const ModelParams& p, const Eigen::MatrixXd& x) {
  HeadForward out;
  Eigen::MatrixXd z1 = (p.head_w * x).colwise() + p.head_b;
  if (!p.hidden) {
    out.v = std::move(z1);
    return out;
  }
  out.h = z1.array().tanh();
  const int blocks = p.disentangle ? p.num_nodes : 1;
  const int n = p.embed_dim;
  out.v.resize(blocks * n, x.cols());
  for (int r = 0; r < blocks; ++r) {
    out.v.block(r * n, 0, n, x.cols()) =
        (p.head_w2.block(r * n, 0, n, p.hidden) * out.h.block(r * p.hidden, 0, p.hidden, x.cols()))
            .colwise() +
        p.head_b2.segment(r * n, n);
  }
  return out;
}

std::vector<CachedPoint> lift_nodes(const ModelParams& p, const HyperParams& hp,
                                    const Eigen::MatrixXd& node_feats) {
  const Eigen::Index n_nodes = node_feats.cols();
  Eigen::MatrixXd pre = p.proj * node_feats;  // n x N
  std::vector<CachedPoint> e;
  e.reserve(static_cast<std::size_t>(n_nodes));
  const double w_txt = p.omega_txt();
  for (Eigen::Index i = 0; i < n_nodes; ++i) {
    e.push_back(lift(w_txt * pre.col(i), hp.curvature()));
  }
  return e;
}

}  // namespace

Eigen::MatrixXd disentangle(const ModelParams& p, const Vec& v_raw) {
  if (v_raw.size() != p.feat_dim) {
    std::ostringstream os;
    os << "disentangle: expected feature dim " << p.feat_dim << ", got " << v_raw.size();
    throw DimensionMismatch(os.str());
  }
  HeadForward hf = head_forward(p, v_raw);
  Eigen::MatrixXd v(p.embed_dim, p.num_nodes);
  for (int i = 0; i < p.num_nodes; ++i) {
    v.col(i) = hf.v.block(p.disentangle ? i * p.embed_dim : 0, 0, p.embed_dim, 1);
  }
  return v;
}

std::vector<LorentzPoint<double>> node_embeddings(const ModelParams& p,
                                                  const HyperParams& hp,
                                                  const Eigen::MatrixXd& node_feats) {
  if (node_feats.rows() != p.text_dim || node_feats.cols() != p.num_nodes) {
    throw DimensionMismatch("node_embeddings: node feature shape mismatch");
  }
  std::vector<LorentzPoint<double>> out;
  for (auto& cp : lift_nodes(p, hp, node_feats)) out.push_back(std::move(cp.p));
  return out;
}

Vec node_scores(const std::vector<LorentzPoint<double>>& v_points,
                const std::vector<LorentzPoint<double>>& e_points, double gamma) {
  if (v_points.size() != e_points.size()) {
    throw DimensionMismatch("node_scores: point count mismatch");
  }
  Vec s(static_cast<Eigen::Index>(v_points.size()));
  for (std::size_t i = 0; i < v_points.size(); ++i) {
    const double d = lorentz_distance(v_points[i], e_points[i]);
    s[static_cast<Eigen::Index>(i)] = sigmoid_nonpos(-gamma * d);
  }
  return s;
}

double classification_loss(const Vec& scores, const PartialLabel& y, int phase) {
  if (scores.size() != static_cast<Eigen::Index>(y.values.size())) {
    throw DimensionMismatch("classification_loss: score/label length mismatch");
  }
  if (phase != 1 && phase != 2) throw Error("classification_loss: phase must be 1 or 2");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double t = target_value(y, i, phase);
    const double s = std::clamp(scores[i], 1e-15, 1.0 - 1e-15);
    acc += -(t * std::log(s) + (1.0 - t) * std::log(1.0 - s));
  }
  return acc / static_cast<double>(scores.size());
}

double entailment_loss(const std::vector<LorentzPoint<double>>& v_points,
                       const std::vector<LorentzPoint<double>>& e_points,
                       const PartialLabel& y) {
  if (v_points.size() != e_points.size() || v_points.size() != y.values.size()) {
    throw DimensionMismatch("entailment_loss: length mismatch");
  }
  double acc = 0.0;
  int positives = 0;
  for (std::size_t i = 0; i < v_points.size(); ++i) {
    if (y.values[i] != Label::Pos) continue;
    ++positives;
    acc += entail_fb(e_points[i], v_points[i], false).violation;
  }
  return positives ? acc / positives : 0.0;
}

double total_loss(double cls, double ent, double omega) { return cls + omega * ent; }

LossBreakdown batch_loss(const ModelParams& p, const HyperParams& hp,
                         const Eigen::MatrixXd& batch_x,
                         const std::vector<const PartialLabel*>& batch_y,
                         int phase, const Eigen::MatrixXd& node_feats,
                         BatchGradients* grads) {
  const Eigen::Index bsz = batch_x.cols();
  const int n_nodes = p.num_nodes;
  const int n = p.embed_dim;
  if (batch_x.rows() != p.feat_dim) {
    throw DimensionMismatch("batch_loss: feature dim mismatch");
  }
  if (static_cast<Eigen::Index>(batch_y.size()) != bsz) {
    throw ConfigMismatch("batch_loss: label/sample count mismatch");
  }
  if (node_feats.rows() != p.text_dim || node_feats.cols() != n_nodes) {
    throw ConfigMismatch("batch_loss: node feature shape mismatch");
  }
  for (const auto* y : batch_y) {
    if (static_cast<int>(y->values.size()) != n_nodes) {
      throw ConfigMismatch("batch_loss: label " + y->sample_id + " has wrong node count");
    }
  }

  const auto curv = hp.curvature();
  const double w_img = p.omega_img();
  const int blocks = p.disentangle ? n_nodes : 1;

  HeadForward hf = head_forward(p, batch_x);
  std::vector<CachedPoint> e = lift_nodes(p, hp, node_feats);

  Eigen::MatrixXd g_v;
  Eigen::MatrixXd g_e_space;
  Vec g_e_time;
  double g_rho_img = 0.0;
  if (grads) {
    g_v = Eigen::MatrixXd::Zero(blocks * n, bsz);
    g_e_space = Eigen::MatrixXd::Zero(n, n_nodes);
    g_e_time = Vec::Zero(n_nodes);
  }

  const double cls_scale = 1.0 / (static_cast<double>(n_nodes) * static_cast<double>(bsz));
  double loss_cls = 0.0, loss_ent = 0.0;

  for (Eigen::Index b = 0; b < bsz; ++b) {
    const PartialLabel& y = *batch_y[b];
    int pos_count = 0;
    for (auto v : y.values) {
      if (v == Label::Pos) ++pos_count;
    }
    const double ent_coef =
        pos_count ? hp.omega / (static_cast<double>(pos_count) * static_cast<double>(bsz)) : 0.0;

    CachedPoint shared_point;
    Vec shared_gs;
    double shared_gt = 0.0;
    if (!p.disentangle) {
      shared_point = lift(w_img * hf.v.col(b), curv);
      shared_gs = Vec::Zero(n);
    }

    double ent_sample = 0.0;
    for (int i = 0; i < n_nodes; ++i) {
      CachedPoint local;
      const CachedPoint& x = p.disentangle
                                 ? (local = lift(w_img * hf.v.block(i * n, b, n, 1), curv))
                                 : shared_point;
      Vec gx_s = Vec::Zero(n);
      double gx_t = 0.0;

      DistFB dist = distance_fb(x.p, e[static_cast<std::size_t>(i)].p);
      const double z = -hp.gamma * dist.dist;
      const double t = target_value(y, i, phase);
      loss_cls += (std::log1p(std::exp(z)) - t * z) / n_nodes;
      if (grads && dist.active) {
        const double dz = (sigmoid_nonpos(z) - t) * cls_scale;
        const double dq = -hp.gamma * dz * dist.dq;
        gx_s += dq * e[static_cast<std::size_t>(i)].p.space;
        gx_t += -dq * e[static_cast<std::size_t>(i)].p.time;
        g_e_space.col(i) += dq * x.p.space;
        g_e_time[i] += -dq * x.p.time;
      }

      if (y.values[static_cast<std::size_t>(i)] == Label::Pos) {
        EntailFB ent = entail_fb(e[static_cast<std::size_t>(i)].p, x.p,
                                 grads != nullptr && ent_coef != 0.0);
        ent_sample += ent.violation;
        if (grads && ent.active && ent_coef != 0.0) {
          gx_s += ent_coef * ent.dx_space;
          gx_t += ent_coef * ent.dx_time;
          g_e_space.col(i) += ent_coef * ent.de_space;
          g_e_time[i] += ent_coef * ent.de_time;
        }
      }

      if (grads && p.disentangle) {
        Vec du = exp_map0_backward(x.u, curv, gx_s, gx_t);
        g_rho_img += du.dot(x.u);
        g_v.block(i * n, b, n, 1) += w_img * du;
      } else if (grads) {
        shared_gs += gx_s;
        shared_gt += gx_t;
      }
    }
    if (grads && !p.disentangle) {
      Vec du = exp_map0_backward(shared_point.u, curv, shared_gs, shared_gt);
      g_rho_img += du.dot(shared_point.u);
      g_v.col(b) += w_img * du;
    }
    if (pos_count) loss_ent += ent_sample / (static_cast<double>(pos_count) * bsz);
  }
  loss_cls /= static_cast<double>(bsz);

  LossBreakdown out;
  out.cls = loss_cls;
  out.ent = loss_ent;
  out.total = total_loss(out.cls, out.ent, hp.omega);

  if (grads) {
    if (p.hidden) {
      grads->head_w2 = Eigen::MatrixXd::Zero(p.head_w2.rows(), p.head_w2.cols());
      grads->head_b2 = Vec::Zero(p.head_b2.size());
      Eigen::MatrixXd g_h = Eigen::MatrixXd::Zero(hf.h.rows(), hf.h.cols());
      for (int r = 0; r < blocks; ++r) {
        auto gv_r = g_v.block(r * n, 0, n, bsz);
        grads->head_w2.block(r * n, 0, n, p.hidden) =
            gv_r * hf.h.block(r * p.hidden, 0, p.hidden, bsz).transpose();
        grads->head_b2.segment(r * n, n) = gv_r.rowwise().sum();
        g_h.block(r * p.hidden, 0, p.hidden, bsz) =
            p.head_w2.block(r * n, 0, n, p.hidden).transpose() * gv_r;
      }
      Eigen::MatrixXd g_z = g_h.array() * (1.0 - hf.h.array().square());
      grads->head_w = g_z * batch_x.transpose();
      grads->head_b = g_z.rowwise().sum();
    } else {
      grads->head_w = g_v * batch_x.transpose();
      grads->head_b = g_v.rowwise().sum();
      grads->head_w2.resize(0, 0);
      grads->head_b2.resize(0);
    }

    Eigen::MatrixXd g_pre(n, n_nodes);
    double g_rho_txt = 0.0;
    const double w_txt = p.omega_txt();
    for (int i = 0; i < n_nodes; ++i) {
      Vec dg = exp_map0_backward(e[static_cast<std::size_t>(i)].u, curv,
                                 Vec(g_e_space.col(i)), g_e_time[i]);
      g_rho_txt += dg.dot(e[static_cast<std::size_t>(i)].u);
      g_pre.col(i) = w_txt * dg;
    }
    grads->proj = g_pre * node_feats.transpose();
    grads->rho_img = g_rho_img;
    grads->rho_txt = g_rho_txt;
  }
  return out;
}

namespace {

double lr_at(const HyperParams& hp, int epoch, int total_epochs) {
  if (hp.warmup_epochs > 0 && epoch < hp.warmup_epochs) {
    return hp.lr * static_cast<double>(epoch + 1) / static_cast<double>(hp.warmup_epochs);
  }
  const int t = epoch - hp.warmup_epochs;
  const int horizon = std::max(1, total_epochs - hp.warmup_epochs);
  return hp.lr * 0.5 * (1.0 + std::cos(kPi * static_cast<double>(t) / horizon));
}

void sgd_step(ModelParams& p, const BatchGradients& g, double lr) {
  p.head_w -= lr * g.head_w;
  p.head_b -= lr * g.head_b;
  if (p.hidden) {
    p.head_w2 -= lr * g.head_w2;
    p.head_b2 -= lr * g.head_b2;
  }
  p.proj -= lr * g.proj;
  p.rho_img -= lr * g.rho_img;
  p.rho_txt -= lr * g.rho_txt;
}

double dataset_loss(const ModelParams& p, const HyperParams& hp,
                    const Eigen::MatrixXd& x, const std::vector<PartialLabel>& labels,
                    int phase, const Eigen::MatrixXd& node_feats) {
  std::vector<const PartialLabel*> ptrs;
  ptrs.reserve(labels.size());
  for (const auto& y : labels) ptrs.push_back(&y);
  return batch_loss(p, hp, x, ptrs, phase, node_feats, nullptr).total;
}

std::vector<double> run_phase(ModelParams& p, const HyperParams& hp,
                              const Eigen::MatrixXd& x,
                              const std::vector<PartialLabel>& labels, int phase,
                              int epochs, const Eigen::MatrixXd& node_feats) {
  std::vector<double> curve;
  curve.push_back(dataset_loss(p, hp, x, labels, phase, node_feats));
  const Eigen::Index total = x.cols();
  std::vector<int> order(static_cast<std::size_t>(total));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = lr_at(hp, epoch, epochs);
    for (Eigen::Index i = 0; i < total; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
    RngStream shuffle(hp.seed, "shuffle/phase" + std::to_string(phase) + "/epoch-" +
                                   std::to_string(epoch));
    shuffle.shuffle(order);

    for (Eigen::Index start = 0; start < total; start += hp.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(hp.batch_size, total - start);
      Eigen::MatrixXd bx(x.rows(), count);
      std::vector<const PartialLabel*> by(static_cast<std::size_t>(count));
      for (Eigen::Index k = 0; k < count; ++k) {
        const int idx = order[static_cast<std::size_t>(start + k)];
        bx.col(k) = x.col(idx);
        by[static_cast<std::size_t>(k)] = &labels[static_cast<std::size_t>(idx)];
      }
      BatchGradients g;
      LossBreakdown lb = batch_loss(p, hp, bx, by, phase, node_feats, &g);
      if (!std::isfinite(lb.total)) {
        std::ostringstream os;
        os << "non-finite loss " << lb.total << " at phase " << phase << " epoch " << epoch
           << " batch " << (start / hp.batch_size) << " (cls=" << lb.cls << ", ent=" << lb.ent
           << ")";
        throw NonFiniteLoss(os.str());
      }
      sgd_step(p, g, lr);
    }
    curve.push_back(dataset_loss(p, hp, x, labels, phase, node_feats));
  }
  return curve;
}

}  // namespace

FitResult fit(const TrainData& data, const Eigen::MatrixXd& node_feats,
              const HyperParams& hp, std::uint64_t taxonomy_fingerprint,
              const std::string& config_echo) {
  const Eigen::Index n_samples = data.x.cols();
  const int n_nodes = static_cast<int>(node_feats.cols());
  if (static_cast<Eigen::Index>(data.labels.size()) != n_samples) {
    throw ConfigMismatch("fit: sample/label count mismatch");
  }
  if (!data.ids.empty() && static_cast<Eigen::Index>(data.ids.size()) != n_samples) {
    throw ConfigMismatch("fit: sample/id count mismatch");
  }
  for (const auto& y : data.labels) {
    if (static_cast<int>(y.values.size()) != n_nodes) {
      throw ConfigMismatch("fit: label " + y.sample_id + " covers " +
                           std::to_string(y.values.size()) + " nodes, expected " +
                           std::to_string(n_nodes));
    }
  }
  if (!data.x.allFinite()) throw ConfigMismatch("fit: non-finite feature entries");
  if (hp.embed_dim < 1 || hp.batch_size < 1 || !(hp.gamma > 0.0) || !(hp.omega >= 0.0) ||
      !(hp.c > 0.0)) {
    throw ConfigMismatch("fit: bad hyperparameters");
  }

  FitResult result;
  ModelParams params = init_params(hp, n_nodes, static_cast<int>(data.x.rows()),
                                   hp.embed_dim, static_cast<int>(node_feats.rows()));

  result.metrics.phase1_loss =
      run_phase(params, hp, data.x, data.labels, 1, hp.epochs_phase1, node_feats);

  if (hp.epochs_phase2 > 0) {
    bool all_soft = true;
    for (const auto& y : data.labels) all_soft = all_soft && y.has_soft;
    std::vector<PartialLabel> augmented;
    augmented.reserve(data.labels.size());
    if (all_soft) {
      augmented = data.labels;
    } else {
      Eigen::MatrixXd c_l = language_corr(node_feats);
      Eigen::MatrixXd c_e = embedding_corr(node_embeddings(params, hp, node_feats));
      CorrelationMatrix cm = combine_corr(c_l, c_e);
      for (const auto& y : data.labels) augmented.push_back(pseudo_labels(y, cm.C));
    }
    if (hp.hard_pseudo) {
      for (auto& y : augmented) y = harden_pseudo_labels(y, hp.hard_pseudo_threshold);
    }
    result.metrics.phase2_loss =
        run_phase(params, hp, data.x, augmented, 2, hp.epochs_phase2, node_feats);
  }

  result.checkpoint.version = 1;
  result.checkpoint.taxonomy_fingerprint = taxonomy_fingerprint;
  result.checkpoint.config_echo = config_echo;
  result.checkpoint.hyper = hp;
  result.checkpoint.params = std::move(params);
  return result;
}

Eigen::MatrixXd infer(const Checkpoint& ckpt, const Eigen::MatrixXd& node_feats,
                      const Eigen::MatrixXd& x) {
  const ModelParams& p = ckpt.params;
  if (x.rows() != p.feat_dim) {
    throw DimensionMismatch("infer: feature dim " + std::to_string(x.rows()) +
                            " does not match checkpoint dim " + std::to_string(p.feat_dim));
  }
  if (node_feats.rows() != p.text_dim || node_feats.cols() != p.num_nodes) {
    throw DimensionMismatch("infer: node feature shape mismatch");
  }
  const auto curv = ckpt.hyper.curvature();
  std::vector<CachedPoint> e = lift_nodes(p, ckpt.hyper, node_feats);
  HeadForward hf = head_forward(p, x);
  const int n = p.embed_dim;
  const double w_img = p.omega_img();

  Eigen::MatrixXd scores(x.cols(), p.num_nodes);
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    for (int i = 0; i < p.num_nodes; ++i) {
      const Eigen::Index row = p.disentangle ? i * n : 0;
      LorentzPoint<double> xp = exp_map0(Vec(w_img * hf.v.block(row, b, n, 1)), curv);
      const double d = lorentz_distance(xp, e[static_cast<std::size_t>(i)].p);
      scores(b, i) = sigmoid_nonpos(-ckpt.hyper.gamma * d);
    }
  }
  return scores;
}

TransferHead fit_transfer_head(const Eigen::MatrixXd& node_score_rows,
                               const std::vector<int>& action_labels, int num_actions,
                               const TransferParams& tp) {
  const Eigen::Index rows = node_score_rows.rows();
  if (num_actions < 1) throw ConfigMismatch("fit_transfer_head: need at least one action");
  if (static_cast<Eigen::Index>(action_labels.size()) != rows) {
    throw ConfigMismatch("fit_transfer_head: row/label count mismatch");
  }
  for (int y : action_labels) {
    if (y < 0 || y >= num_actions) {
      throw LabelOutOfRange("fit_transfer_head: label " + std::to_string(y) +
                            " outside [0, " + std::to_string(num_actions) + ")");
    }
  }
  TransferHead head;
  head.w = Eigen::MatrixXd::Zero(num_actions, node_score_rows.cols());
  head.b = Vec::Zero(num_actions);
  if (rows == 0) return head;

  for (int epoch = 0; epoch < tp.epochs; ++epoch) {
    Eigen::MatrixXd probs = predict_actions(head, node_score_rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      probs(r, action_labels[static_cast<std::size_t>(r)]) -= 1.0;
    }
    probs /= static_cast<double>(rows);
    head.w -= tp.lr * (probs.transpose() * node_score_rows);
    head.b -= tp.lr * probs.colwise().sum().transpose();
  }
  return head;
}

Eigen::MatrixXd predict_actions(const TransferHead& head,
                                const Eigen::MatrixXd& node_score_rows) {
  if (node_score_rows.cols() != head.w.cols()) {
    throw DimensionMismatch("predict_actions: node score dim mismatch");
  }
  Eigen::MatrixXd logits =
      (node_score_rows * head.w.transpose()).rowwise() + head.b.transpose();
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    Eigen::ArrayXd ex = (logits.row(r).array() - mx).exp();
    probs.row(r) = ex / ex.sum();
  }
  return probs;
}

PairGrad entailment_pair_grad(const Vec& apex_tangent, const Vec& child_tangent,
                              Curvature<double> curv) {
  CachedPoint apex = lift(apex_tangent, curv);
  CachedPoint child = lift(child_tangent, curv);
  EntailFB fb = entail_fb(apex.p, child.p, true);
  PairGrad out;
  out.violation = fb.violation;
  if (fb.active) {
    out.d_apex = exp_map0_backward(apex_tangent, curv, fb.de_space, fb.de_time);
    out.d_child = exp_map0_backward(child_tangent, curv, fb.dx_space, fb.dx_time);
  } else {
    out.d_apex = Vec::Zero(apex_tangent.size());
    out.d_child = Vec::Zero(child_tangent.size());
  }
  return out;
}

}  // namespace verbspace
