#include "filament/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace filament {

namespace {

constexpr int kMaxLocalOrder = 16;
constexpr int kMaxDeriv = 3;

void check_domain(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("b-spline evaluation point outside [0,1]: x=" + std::to_string(x));
  }
}

}  // namespace

KnotVector::KnotVector(int order, std::vector<double> interior_knots)
    : order_(order), interior_count_(static_cast<int>(interior_knots.size())) {
  if (order < 2) {
    throw std::invalid_argument("b-spline order must be at least 2");
  }
  if (order > kMaxLocalOrder) {
    throw std::invalid_argument("b-spline order above supported maximum of 16");
  }
  double prev = 0.0;
  for (double t : interior_knots) {
    if (!(t > prev && t < 1.0)) {
      throw std::invalid_argument("interior knots must be strictly increasing inside (0,1)");
    }
    prev = t;
  }
  if (interior_count_ > 0) {
    double min_gap = 1.0, max_gap = 0.0, lo = 0.0;
    for (int i = 0; i <= interior_count_; ++i) {
      double hi = i < interior_count_ ? interior_knots[i] : 1.0;
      min_gap = std::min(min_gap, hi - lo);
      max_gap = std::max(max_gap, hi - lo);
      lo = hi;
    }
    if (max_gap > kMaxMeshRatio * min_gap) {
      throw std::invalid_argument("knot mesh ratio exceeds bound");
    }
  }
  knots_.reserve(2 * order + interior_count_);
  knots_.insert(knots_.end(), order, 0.0);
  knots_.insert(knots_.end(), interior_knots.begin(), interior_knots.end());
  knots_.insert(knots_.end(), order, 1.0);
}

KnotVector make_uniform_knots(int order, int num_basis) {
  if (num_basis < order) {
    throw std::invalid_argument("num_basis must be at least the spline order");
  }
  int n_interior = num_basis - order;
  std::vector<double> interior(n_interior);
  for (int i = 0; i < n_interior; ++i) {
    interior[i] = static_cast<double>(i + 1) / (n_interior + 1);
  }
  return KnotVector(order, std::move(interior));
}

// Index i with knots[i] <= x < knots[i+1], restricted to the nonempty spans
// [order-1, order-1+interior_count]; x = 1 maps to the last span.
int KnotVector::span(double x) const {
  int lo = order_ - 1;
  int hi = order_ - 1 + interior_count_;
  if (x >= 1.0) return hi;
  auto it = std::upper_bound(knots_.begin() + lo, knots_.begin() + hi + 1, x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int KnotVector::evaluate_local(double x, int deriv, double* out) const {
  check_domain(x);
  if (deriv < 0 || deriv > kMaxDeriv) {
    throw std::invalid_argument("derivative order must be in 0..3");
  }
  if (deriv >= order_) {
    throw std::invalid_argument("derivative order must be below the spline order");
  }
  const int q = order_;
  const int i = span(x);
  const double* t = knots_.data();

  // Nonzero values of the order-(q - deriv) basis at span i, then the
  // derivative recursion climbs one order per differentiation:
  //   B^{(d)}_{j,k} = (k-1) [ B^{(d-1)}_{j,k-1} / (t_{j+k-1} - t_j)
  //                         - B^{(d-1)}_{j+1,k-1} / (t_{j+k} - t_{j+1}) ].
  std::array<double, kMaxLocalOrder + 1> work{};
  std::array<double, kMaxLocalOrder + 1> next{};

  const int k0 = q - deriv;
  // Triangular Cox-de Boor recurrence for the k0 nonzero order-k0 values:
  // work[m] = B_{i-k0+1+m, k0}(x).
  work[0] = 1.0;
  for (int k = 2; k <= k0; ++k) {
    double saved = 0.0;
    for (int m = 0; m < k - 1; ++m) {
      int j = i - k + 2 + m;               // index of the order-(k-1) value in work[m]
      double den = t[j + k - 1] - t[j];    // support width at order k
      double term = den > 0.0 ? work[m] / den : 0.0;
      work[m] = saved + (t[j + k - 1] - x) * term;
      saved = (x - t[j]) * term;
    }
    work[k - 1] = saved;
  }

  for (int k = k0 + 1; k <= q; ++k) {
    for (int m = 0; m < k; ++m) {
      int j = i - k + 1 + m;
      double left = 0.0, right = 0.0;
      if (m > 0) {
        double den = t[j + k - 1] - t[j];
        if (den > 0.0) left = work[m - 1] / den;
      }
      if (m < k - 1) {
        double den = t[j + k] - t[j + 1];
        if (den > 0.0) right = work[m] / den;
      }
      next[m] = (k - 1) * (left - right);
    }
    std::copy(next.begin(), next.begin() + k, work.begin());
  }

  std::copy(work.begin(), work.begin() + q, out);
  return i - q + 1;
}

Eigen::VectorXd KnotVector::evaluate(double x, int deriv) const {
  std::array<double, kMaxLocalOrder> local{};
  int first = evaluate_local(x, deriv, local.data());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_count());
  for (int m = 0; m < order_; ++m) out[first + m] = local[m];
  return out;
}

BasisSpec::BasisSpec(KnotVector kv1, KnotVector kv2)
    : kv1_(std::move(kv1)), kv2_(std::move(kv2)) {}

Eigen::VectorXd BasisSpec::tensor(const Eigen::Vector2d& x, int r1, int r2) const {
  if (r1 + r2 > kMaxDeriv) {
    throw std::invalid_argument("total derivative order must be at most 3");
  }
  std::array<double, kMaxLocalOrder> v1{}, v2{};
  int first1 = kv1_.evaluate_local(x[0], r1, v1.data());
  int first2 = kv2_.evaluate_local(x[1], r2, v2.data());
  const int j2 = kv2_.basis_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dimension());
  for (int a = 0; a < kv1_.order(); ++a) {
    double va = v1[a];
    double* row = out.data() + (first1 + a) * j2 + first2;
    for (int b = 0; b < kv2_.order(); ++b) row[b] = va * v2[b];
  }
  return out;
}

Eigen::MatrixXd BasisSpec::design_matrix(const std::vector<Eigen::Vector2d>& xs) const {
  Eigen::MatrixXd design(static_cast<Eigen::Index>(xs.size()), dimension());
  design.setZero();
  std::array<double, kMaxLocalOrder> v1{}, v2{};
  const int j2 = kv2_.basis_count();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    int first1, first2;
    try {
      first1 = kv1_.evaluate_local(xs[i][0], 0, v1.data());
      first2 = kv2_.evaluate_local(xs[i][1], 0, v2.data());
    } catch (const std::domain_error& e) {
      throw std::domain_error("design point at row " + std::to_string(i) +
                              " outside [0,1]^2: " + e.what());
    }
    for (int a = 0; a < kv1_.order(); ++a) {
      for (int b = 0; b < kv2_.order(); ++b) {
        design(static_cast<Eigen::Index>(i), (first1 + a) * j2 + first2 + b) = v1[a] * v2[b];
      }
    }
  }
  return design;
}

}  // namespace filament
