#ifndef FILAMENT_FIELD_HPP
#define FILAMENT_FIELD_HPP

#include <Eigen/Dense>

#include "filament/bspline.hpp"

namespace filament {

// Value, gradient and second derivatives of a surface at a point.
struct Jet2 {
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  double f20 = 0.0, f11 = 0.0, f02 = 0.0;

  Eigen::Matrix2d hessian() const {
    Eigen::Matrix2d h;
    h << f20, f11, f11, f02;
    return h;
  }
};

// A twice-differentiable surface on [0,1]^2. Implementations must be
// immutable; evaluation is safe from any number of threads.
class Field {
 public:
  virtual ~Field() = default;
  virtual double value(const Eigen::Vector2d& x) const = 0;
  virtual Jet2 jet2(const Eigen::Vector2d& x) const = 0;
};

// Smallest-eigenvalue pair of the symmetric Hessian [[u, v], [v, w]].
struct EigenFrame {
  double lambda_min = 0.0;
  Eigen::Vector2d v = Eigen::Vector2d::UnitX();  // unit, first nonzero component > 0
  double gap = 0.0;                              // eigenvalue separation
};

// Closed form: lambda_min = (u + w - s)/2 with s = sqrt((u-w)^2 + 4 v^2),
// eigenvector direction (u - w - s, 2v); when both direction components
// vanish the axis of the smaller diagonal entry is used.
EigenFrame eigen_min(double u, double v, double w);

Eigen::Vector2d grad(const Field& field, const Eigen::Vector2d& x);
Eigen::Vector3d d2f(const Field& field, const Eigen::Vector2d& x);  // (f20, f11, f02)
EigenFrame eigen_frame(const Field& field, const Eigen::Vector2d& x);

// <grad f(x), V(x)>; zero (with lambda_min < 0) characterizes ridge points.
double ridge_residual(const Field& field, const Eigen::Vector2d& x);

// Jacobian of x -> V(x) by central differences, sign-aligned to V(x).
// Diagnostic only.
Eigen::Matrix2d grad_v(const Field& field, const Eigen::Vector2d& x, double step = 1e-5);

// Spline surface: coefficients bound to a tensor basis. Supports all partial
// derivatives with |r| <= 3 analytically.
class ScalarField final : public Field {
 public:
  ScalarField(BasisSpec spec, Eigen::VectorXd theta);

  const BasisSpec& spec() const { return spec_; }
  const Eigen::VectorXd& theta() const { return theta_; }

  double deriv(const Eigen::Vector2d& x, int r1, int r2) const;

  double value(const Eigen::Vector2d& x) const override { return deriv(x, 0, 0); }
  Jet2 jet2(const Eigen::Vector2d& x) const override;

 private:
  double contract(const double* v1, int first1, const double* v2, int first2) const;

  BasisSpec spec_;
  Eigen::VectorXd theta_;
};

}  // namespace filament

#endif  // FILAMENT_FIELD_HPP
