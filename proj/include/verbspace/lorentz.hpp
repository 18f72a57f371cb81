#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "verbspace/errors.hpp"

namespace verbspace {

template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecX<double>;
using Mat = MatX<double>;

/// Hyperboloid parameters: the manifold has constant curvature -c, and K
/// sets the entailment-cone boundary condition near the origin.
template <typename S = double>
struct Curvature {
  S c = S(1);
  S K = S(0.1);
};

/// Point on the upper sheet of the two-sheeted hyperboloid
/// { x : <x_space, x_space> - x_time^2 = -1/c, x_time > 0 }.
template <typename S = double>
struct LorentzPoint {
  VecX<S> space;
  S time = S(0);
  Curvature<S> curv;
};

namespace detail {

/// sinh(t)/t, series-expanded below t = 1e-4 to avoid cancellation.
template <typename S>
S sinhc(S t) {
  if (t < S(1e-4)) {
    const S t2 = t * t;
    return S(1) + t2 / S(6) + t2 * t2 / S(120);
  }
  return std::sinh(t) / t;
}

/// d(sinh(t)/t)/dt / t = (t cosh t - sinh t) / t^3; series below t = 1e-4.
/// Used by the backward pass of exp_map0.
template <typename S>
S sinhc_prime_over_t(S t) {
  if (t < S(1e-4)) {
    const S t2 = t * t;
    return S(1) / S(3) + t2 / S(30) + t2 * t2 / S(840);
  }
  return (t * std::cosh(t) - std::sinh(t)) / (t * t * t);
}

template <typename S>
void check_pair(const LorentzPoint<S>& x, const LorentzPoint<S>& y) {
  if (x.space.size() != y.space.size()) {
    std::ostringstream os;
    os << "lorentz: dimension mismatch (" << x.space.size() << " vs "
       << y.space.size() << ")";
    throw DimensionMismatch(os.str());
  }
  if (x.curv.c != y.curv.c) {
    std::ostringstream os;
    os << "lorentz: curvature mismatch (c=" << x.curv.c << " vs c=" << y.curv.c
       << ")";
    throw CurvatureMismatch(os.str());
  }
}

}  // namespace detail

/// Origin of the hyperboloid: space = 0, time = sqrt(1/c).
template <typename S = double>
LorentzPoint<S> lorentz_origin(Eigen::Index dim, Curvature<S> curv = {}) {
  return {VecX<S>::Zero(dim), std::sqrt(S(1) / curv.c), curv};
}

/// Lorentzian inner product  (x, y)_L = <x_space, y_space> - x_time * y_time.
/// For any on-manifold point, (x, x)_L = -1/c.
template <typename S>
S lorentz_inner(const LorentzPoint<S>& x, const LorentzPoint<S>& y) {
  detail::check_pair(x, y);
  return x.space.dot(y.space) - x.time * y.time;
}

/// Exponential map at the origin: lifts a tangent vector onto the
/// hyperboloid via  x_space = sinh(sqrt(c)|v|)/(sqrt(c)|v|) * v, with the
/// time component recovered from the manifold constraint.
/// Throws MagnitudeOverflow when sqrt(c)|v| > 350 (cosh would overflow
/// double range shortly beyond).
template <typename Derived>
LorentzPoint<typename Derived::Scalar> exp_map0(
    const Eigen::MatrixBase<Derived>& v_space,
    Curvature<typename Derived::Scalar> curv = {}) {
  using S = typename Derived::Scalar;
  const S sqrt_c = std::sqrt(curv.c);
  const S m = v_space.norm();
  const S t = sqrt_c * m;
  if (!(t <= S(350))) {
    std::ostringstream os;
    os << "exp_map0: sqrt(c)*|v| = " << t << " exceeds overflow guard 350";
    throw MagnitudeOverflow(os.str());
  }
  LorentzPoint<S> x;
  x.curv = curv;
  x.space = detail::sinhc(t) * v_space;
  x.time = std::sqrt(S(1) / curv.c + x.space.squaredNorm());
  return x;
}

/// Geodesic distance  d = sqrt(1/c) * acosh(-c (x, y)_L); the acosh
/// argument is clamped to >= 1 against floating-point noise, and identical
/// coordinates short-circuit to exactly zero.
template <typename S>
S lorentz_distance(const LorentzPoint<S>& x, const LorentzPoint<S>& y) {
  detail::check_pair(x, y);
  if (x.time == y.time && x.space == y.space) return S(0);
  const S a = std::max(S(1), -x.curv.c * lorentz_inner(x, y));
  return std::sqrt(S(1) / x.curv.c) * std::acosh(a);
}

/// Half-aperture of the entailment cone rooted at x:
/// alpha(x) = asin(2K / (sqrt(c) |x_space|)), argument clamped to 1.
/// The cone narrows as x moves away from the origin.
template <typename S>
S half_aperture(const LorentzPoint<S>& x) {
  const S r = x.space.norm();
  if (r == S(0)) {
    throw OriginAperture("half_aperture: undefined at the origin");
  }
  const S w = std::min(S(1), S(2) * x.curv.K / (std::sqrt(x.curv.c) * r));
  return std::asin(w);
}

namespace detail {

/// Gram determinant |a|^2 |b|^2 - <a,b>^2 via Lagrange's identity, as a sum
/// of squared 2x2 cross terms. Non-negative by construction, and exactly
/// zero for proportional vectors, which keeps the exterior angle exact at
/// its collinear limit.
template <typename S>
S gram_det(const VecX<S>& a, const VecX<S>& b) {
  S acc = S(0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = i + 1; j < a.size(); ++j) {
      const S cross = a[i] * b[j] - a[j] * b[i];
      acc += cross * cross;
    }
  }
  return acc;
}

}  // namespace detail

/// Exterior angle at apex x toward y:
/// theta = acos((y_time + x_time c (x,y)_L) /
///              (|x_space| sqrt((c (x,y)_L)^2 - 1))).
/// Evaluated in atan2 form with the sine recovered from the spatial Gram
/// determinant, so theta = 0 when y lies on the outward geodesic ray
/// through x and theta = pi when y is the origin, both exactly.
template <typename S>
S exterior_angle(const LorentzPoint<S>& x, const LorentzPoint<S>& y) {
  const S q = lorentz_inner(x, y);
  const S r = x.space.norm();
  if (r == S(0)) {
    throw OriginApex("exterior_angle: apex at the origin");
  }
  const S c = x.curv.c;
  if (!(q < -S(1) / c - S(1e-12))) {
    throw DegeneratePair("exterior_angle: points coincide within tolerance");
  }
  const S numer = y.time + x.time * c * q;
  const S sine_part = std::sqrt(c * detail::gram_det(x.space, y.space));
  return std::atan2(sine_part, numer);
}

/// Entailment-cone violation  max(0, theta(e, v) - alpha(e)); zero iff v
/// lies inside or on the cone rooted at e.
template <typename S>
S entailment_violation(const LorentzPoint<S>& e, const LorentzPoint<S>& v) {
  return std::max(S(0), exterior_angle(e, v) - half_aperture(e));
}

/// Adjoint of exp_map0: pulls cotangents (g_space, g_time) at
/// x = exp_map0(u) back to the tangent vector u. Smooth at u = 0.
template <typename S>
VecX<S> exp_map0_backward(const VecX<S>& u, Curvature<S> curv,
                          const VecX<S>& g_space, S g_time) {
  const S sqrt_c = std::sqrt(curv.c);
  const S t = sqrt_c * u.norm();
  const S sc = detail::sinhc(t);
  const S phi = detail::sinhc_prime_over_t(t);
  const S along = curv.c * phi * u.dot(g_space) + sqrt_c * sc * g_time;
  return sc * g_space + along * u;
}

}  // namespace verbspace
