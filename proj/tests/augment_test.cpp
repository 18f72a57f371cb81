#include "verbspace/augment.hpp"

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_support.hpp"
#include "verbspace/errors.hpp"
#include "verbspace/rng.hpp"

using namespace verbspace;
namespace vt = verbspace::testing;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

PartialLabel label_of(std::vector<Label> values) {
  PartialLabel y;
  y.sample_id = "s";
  y.values = std::move(values);
  return y;
}

}  // namespace

TEST_CASE("language_corr") {
  Eigen::MatrixXd same(3, 2);
  same.col(0) << 1, 0, 0;
  same.col(1) << 1, 0, 0;
  CHECK(language_corr(same).isApprox(Eigen::MatrixXd::Ones(2, 2), 1e-12));

  Eigen::MatrixXd ortho(2, 2);
  ortho.col(0) << 1, 0;
  ortho.col(1) << 0, 1;
  Eigen::MatrixXd c = language_corr(ortho);
  CHECK(c(0, 1) == 0.0);
  CHECK(c(0, 0) == 1.0);

  Eigen::MatrixXd pair(2, 2);
  pair.col(0) << 1, 0;
  pair.col(1) << std::sqrt(2.0) / 2, std::sqrt(2.0) / 2;
  CHECK(language_corr(pair)(0, 1) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));

  Eigen::MatrixXd zero(2, 2);
  zero.col(0) << 1, 0;
  zero.col(1) << 0, 0;
  CHECK_THROWS_AS(language_corr(zero), ZeroVector);
}

TEST_CASE("embedding_corr") {
  Curvature<> c1{1.0, 0.1};
  std::vector<LorentzPoint<double>> pts{lorentz_origin<double>(2, c1),
                                        exp_map0(vec2(0.7, 0), c1),
                                        exp_map0(vec2(0.7, 0), c1)};
  Eigen::MatrixXd ce = embedding_corr(pts);
  CHECK(ce(0, 0) == 0.0);
  CHECK(ce(1, 2) == doctest::Approx(0.0).epsilon(1e-12));  // identical points
  CHECK(ce(0, 1) == doctest::Approx(-0.7).epsilon(1e-9));
  CHECK(ce.isApprox(ce.transpose(), 1e-15));
}

TEST_CASE("combine_corr") {
  Eigen::MatrixXd cl(3, 3), ce(3, 3);
  cl << 1.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 1.0;
  ce << 0.0, -0.2, -0.8, -0.2, 0.0, -0.4, -0.8, -0.4, 0.0;

  SUBCASE("identical components reduce to one normalized matrix") {
    CorrelationMatrix cm = combine_corr(cl, cl);
    // off-diag range of cl is [0.1, 0.5]
    CHECK(cm.C(0, 1) == doctest::Approx(1.0));
    CHECK(cm.C(0, 2) == doctest::Approx(0.0));
    CHECK(cm.C(1, 2) == doctest::Approx(0.5));
    CHECK(!cm.degenerate_language);
  }

  SUBCASE("elementwise hand recomputation") {
    CorrelationMatrix cm = combine_corr(cl, ce);
    // off-diagonal ranges: cl in [0.1, 0.5], ce in [-0.8, -0.2]
    auto norm_l = [](double v) { return (v - 0.1) / 0.4; };
    auto norm_e = [](double v) { return (v - (-0.8)) / 0.6; };
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        const double expect = (norm_l(cl(i, j)) + norm_e(ce(i, j))) / 2.0;
        CHECK(cm.C(i, j) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
    CHECK(cm.C.isApprox(cm.C.transpose(), 1e-15));
    CHECK(cm.C.minCoeff() >= 0.0);
    CHECK(cm.C.maxCoeff() <= 1.0);
  }

  SUBCASE("constant component collapses to zero") {
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 3, 0.4);
    CorrelationMatrix cm = combine_corr(flat, ce);
    CHECK(cm.degenerate_language);
    CHECK(!cm.degenerate_embedding);
    // language side contributes nothing
    CHECK(cm.C(0, 2) == doctest::Approx(0.0));
    CorrelationMatrix both = combine_corr(flat, flat);
    CHECK(both.C.cwiseAbs().maxCoeff() == 0.0);
  }

  Eigen::MatrixXd bad(2, 3);
  CHECK_THROWS_AS(combine_corr(bad, bad), ShapeMismatch);
}

TEST_CASE("pseudo_labels formula") {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 0.8, 0.8, 1.0;
  PartialLabel y = label_of({Label::Pos, Label::Unknown});
  PartialLabel out = pseudo_labels(y, c);
  CHECK(out.has_soft);
  CHECK(out.soft[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(out.soft[0] == 0.0);  // positive entries untouched
  CHECK(out.values == y.values);

  PartialLabel none = pseudo_labels(label_of({Label::Neg, Label::Unknown}), c);
  CHECK(none.soft.cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd c3(3, 3);
  c3 << 1.0, 0.6, 0.7, 0.6, 1.0, 0.2, 0.7, 0.2, 1.0;
  PartialLabel clamped =
      pseudo_labels(label_of({Label::Unknown, Label::Pos, Label::Pos}), c3);
  CHECK(clamped.soft[0] == 1.0);  // 0.6 + 0.7 clamped

  CHECK_THROWS_AS(pseudo_labels(label_of({Label::Pos}), c3), ShapeMismatch);
}

TEST_CASE("pseudo_labels matches the double-loop oracle bitwise") {
  RngStream rng(21, "test/pseudo");
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(19));
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i) {
      c(i, i) = 1.0;
      for (int j = i + 1; j < n; ++j) {
        c(i, j) = c(j, i) = rng.uniform01();
      }
    }
    std::vector<Label> values(static_cast<std::size_t>(n));
    for (auto& v : values) {
      const double u = rng.uniform01();
      v = u < 0.3 ? Label::Pos : (u < 0.5 ? Label::Neg : Label::Unknown);
    }
    PartialLabel y = label_of(values);
    PartialLabel out = pseudo_labels(y, c);
    Eigen::VectorXd oracle = vt::brute_force_pseudo(y, c);
    for (int i = 0; i < n; ++i) CHECK(out.soft[i] == oracle[i]);  // bitwise
  }
}

TEST_CASE("pseudo_labels is monotone in added positives") {
  RngStream rng(23, "test/pseudo-mono");
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(10));
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i) {
      c(i, i) = 1.0;
      for (int j = i + 1; j < n; ++j) c(i, j) = c(j, i) = rng.uniform01();
    }
    std::vector<Label> values(static_cast<std::size_t>(n), Label::Unknown);
    values[0] = Label::Pos;
    PartialLabel base = label_of(values);
    values[1] = Label::Pos;  // add one more positive
    PartialLabel more = label_of(values);
    Eigen::VectorXd a = pseudo_labels(base, c).soft;
    Eigen::VectorXd b = pseudo_labels(more, c).soft;
    for (int i = 2; i < n; ++i) CHECK(b[i] >= a[i]);
  }
}

TEST_CASE("harden_pseudo_labels") {
  Eigen::MatrixXd c(3, 3);
  c << 1.0, 0.9, 0.2, 0.9, 1.0, 0.1, 0.2, 0.1, 1.0;
  PartialLabel y =
      pseudo_labels(label_of({Label::Pos, Label::Unknown, Label::Unknown}), c);
  PartialLabel hard = harden_pseudo_labels(y, 0.5);
  CHECK(hard.soft[1] == 1.0);
  CHECK(hard.soft[2] == 0.0);
}
