#ifndef FILAMENT_BSPLINE_HPP
#define FILAMENT_BSPLINE_HPP

#include <Eigen/Dense>
#include <vector>

namespace filament {

// Clamped univariate B-spline basis on [0, 1]: the first and last knot are
// repeated `order` times, interior knots are strictly increasing. With N
// interior knots the basis has J = order + N functions.
class KnotVector {
 public:
  // Interior knots must lie strictly inside (0, 1), be strictly increasing,
  // and keep the mesh ratio max(gap)/min(gap) bounded.
  KnotVector(int order, std::vector<double> interior_knots);

  int order() const { return order_; }
  int interior_count() const { return interior_count_; }
  int basis_count() const { return order_ + interior_count_; }
  const std::vector<double>& knots() const { return knots_; }

  // All J basis values (deriv = 0) or derivatives at x. At most `order`
  // entries are nonzero. x = 1 uses the left-limit convention so the last
  // basis function attains 1.
  Eigen::VectorXd evaluate(double x, int deriv = 0) const;

  // Fast path: writes the `order` potentially nonzero values into out and
  // returns the index of the first one. out must hold order() doubles.
  int evaluate_local(double x, int deriv, double* out) const;

  static constexpr double kMaxMeshRatio = 1e6;

 private:
  int span(double x) const;

  int order_;
  int interior_count_;
  std::vector<double> knots_;  // size 2*order + interior_count
};

// N = num_basis - order equally spaced interior knots.
KnotVector make_uniform_knots(int order, int num_basis);

// Tensor product of two univariate bases. The flat coefficient layout is
// dictionary order with the first axis outer: (j1, j2) -> j1*J2 + j2.
class BasisSpec {
 public:
  BasisSpec(KnotVector kv1, KnotVector kv2);

  const KnotVector& axis(int k) const { return k == 0 ? kv1_ : kv2_; }
  int dimension() const { return kv1_.basis_count() * kv2_.basis_count(); }
  int flat_index(int j1, int j2) const { return j1 * kv2_.basis_count() + j2; }

  // b^{(r)}(x): outer product of the two univariate derivative vectors,
  // flattened in dictionary order. Requires r1 < q1, r2 < q2, |r| <= 3.
  Eigen::VectorXd tensor(const Eigen::Vector2d& x, int r1, int r2) const;

  // Rows are tensor(xs[i], 0, 0); each row sums to 1.
  Eigen::MatrixXd design_matrix(const std::vector<Eigen::Vector2d>& xs) const;

 private:
  KnotVector kv1_;
  KnotVector kv2_;
};

}  // namespace filament

#endif  // FILAMENT_BSPLINE_HPP
