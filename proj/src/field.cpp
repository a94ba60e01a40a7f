#include "filament/field.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace filament {

EigenFrame eigen_min(double u, double v, double w) {
  EigenFrame frame;
  double s = std::hypot(u - w, 2.0 * v);
  frame.lambda_min = 0.5 * (u + w - s);
  frame.gap = s;
  double d1 = u - w - s;
  double d2 = 2.0 * v;
  if (std::abs(d1) <= 1e-14 && std::abs(d2) <= 1e-14) {
    // Either a repeated eigenvalue or v = 0 with u >= w; pick the axis of
    // the smaller diagonal entry.
    frame.v = u <= w ? Eigen::Vector2d::UnitX() : Eigen::Vector2d::UnitY();
    return frame;
  }
  frame.v = Eigen::Vector2d(d1, d2) / std::hypot(d1, d2);
  double lead = frame.v[0] != 0.0 ? frame.v[0] : frame.v[1];
  if (lead < 0.0) frame.v = -frame.v;
  return frame;
}

Eigen::Vector2d grad(const Field& field, const Eigen::Vector2d& x) {
  return field.jet2(x).gradient;
}

Eigen::Vector3d d2f(const Field& field, const Eigen::Vector2d& x) {
  Jet2 j = field.jet2(x);
  return {j.f20, j.f11, j.f02};
}

EigenFrame eigen_frame(const Field& field, const Eigen::Vector2d& x) {
  Jet2 j = field.jet2(x);
  return eigen_min(j.f20, j.f11, j.f02);
}

double ridge_residual(const Field& field, const Eigen::Vector2d& x) {
  Jet2 j = field.jet2(x);
  return eigen_min(j.f20, j.f11, j.f02).v.dot(j.gradient);
}

Eigen::Matrix2d grad_v(const Field& field, const Eigen::Vector2d& x, double step) {
  Eigen::Vector2d center = eigen_frame(field, x).v;
  Eigen::Matrix2d jac;
  for (int axis = 0; axis < 2; ++axis) {
    Eigen::Vector2d lo = x, hi = x;
    lo[axis] -= step;
    hi[axis] += step;
    Eigen::Vector2d v_lo = eigen_frame(field, lo).v;
    Eigen::Vector2d v_hi = eigen_frame(field, hi).v;
    // V is defined up to sign; align neighbors with the center vector.
    if (v_lo.dot(center) < 0.0) v_lo = -v_lo;
    if (v_hi.dot(center) < 0.0) v_hi = -v_hi;
    jac.col(axis) = (v_hi - v_lo) / (2.0 * step);
  }
  return jac;
}

ScalarField::ScalarField(BasisSpec spec, Eigen::VectorXd theta)
    : spec_(std::move(spec)), theta_(std::move(theta)) {
  if (theta_.size() != spec_.dimension()) {
    throw std::invalid_argument("coefficient length does not match basis dimension");
  }
  if (!theta_.allFinite()) {
    throw std::invalid_argument("coefficients must be finite");
  }
}

double ScalarField::contract(const double* v1, int first1, const double* v2, int first2) const {
  const int q1 = spec_.axis(0).order();
  const int q2 = spec_.axis(1).order();
  const int j2 = spec_.axis(1).basis_count();
  double acc = 0.0;
  for (int a = 0; a < q1; ++a) {
    const double* row = theta_.data() + (first1 + a) * j2 + first2;
    double inner = 0.0;
    for (int b = 0; b < q2; ++b) inner += v2[b] * row[b];
    acc += v1[a] * inner;
  }
  return acc;
}

double ScalarField::deriv(const Eigen::Vector2d& x, int r1, int r2) const {
  if (r1 + r2 > 3) throw std::invalid_argument("total derivative order must be at most 3");
  std::array<double, 16> v1{}, v2{};
  int first1 = spec_.axis(0).evaluate_local(x[0], r1, v1.data());
  int first2 = spec_.axis(1).evaluate_local(x[1], r2, v2.data());
  return contract(v1.data(), first1, v2.data(), first2);
}

Jet2 ScalarField::jet2(const Eigen::Vector2d& x) const {
  std::array<double, 16> a0{}, a1{}, a2{}, b0{}, b1{}, b2{};
  int f1 = spec_.axis(0).evaluate_local(x[0], 0, a0.data());
  spec_.axis(0).evaluate_local(x[0], 1, a1.data());
  spec_.axis(0).evaluate_local(x[0], 2, a2.data());
  int f2 = spec_.axis(1).evaluate_local(x[1], 0, b0.data());
  spec_.axis(1).evaluate_local(x[1], 1, b1.data());
  spec_.axis(1).evaluate_local(x[1], 2, b2.data());
  Jet2 jet;
  jet.value = contract(a0.data(), f1, b0.data(), f2);
  jet.gradient[0] = contract(a1.data(), f1, b0.data(), f2);
  jet.gradient[1] = contract(a0.data(), f1, b1.data(), f2);
  jet.f20 = contract(a2.data(), f1, b0.data(), f2);
  jet.f11 = contract(a1.data(), f1, b1.data(), f2);
  jet.f02 = contract(a0.data(), f1, b2.data(), f2);
  return jet;
}

}  // namespace filament
