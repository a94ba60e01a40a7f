#include "filament/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "filament/rng.hpp"

namespace filament {

AnalyticField::AnalyticField(std::function<double(double, double)> f, double fd_step)
    : f_(std::move(f)), step_(fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
}

double AnalyticField::deriv(const Eigen::Vector2d& x, int r1, int r2) const {
  if (r1 < 0 || r2 < 0 || r1 + r2 > 2) {
    throw std::invalid_argument("analytic field derivatives support |r| <= 2");
  }
  const double h = step_;
  const double x1 = x[0], x2 = x[1];
  if (r1 == 0 && r2 == 0) return f_(x1, x2);
  if (r1 == 1 && r2 == 0) return (f_(x1 + h, x2) - f_(x1 - h, x2)) / (2.0 * h);
  if (r1 == 0 && r2 == 1) return (f_(x1, x2 + h) - f_(x1, x2 - h)) / (2.0 * h);
  if (r1 == 2 && r2 == 0) {
    return (f_(x1 + h, x2) - 2.0 * f_(x1, x2) + f_(x1 - h, x2)) / (h * h);
  }
  if (r1 == 0 && r2 == 2) {
    return (f_(x1, x2 + h) - 2.0 * f_(x1, x2) + f_(x1, x2 - h)) / (h * h);
  }
  // r = (1,1)
  return (f_(x1 + h, x2 + h) - f_(x1 + h, x2 - h) - f_(x1 - h, x2 + h) + f_(x1 - h, x2 - h)) /
         (4.0 * h * h);
}

Jet2 AnalyticField::jet2(const Eigen::Vector2d& x) const {
  Jet2 jet;
  jet.value = deriv(x, 0, 0);
  jet.gradient[0] = deriv(x, 1, 0);
  jet.gradient[1] = deriv(x, 0, 1);
  jet.f20 = deriv(x, 2, 0);
  jet.f11 = deriv(x, 1, 1);
  jet.f02 = deriv(x, 0, 2);
  return jet;
}

AnalyticField ring_surface() {
  return AnalyticField([](double x1, double x2) {
    constexpr double sd = 0.3;
    constexpr double mean = 0.5;
    constexpr double norm = 0.3 * 2.506628274631000502415765284811;  // sd * sqrt(2 pi)
    double r = std::sqrt(x1 * x1 + x2 * x2);
    double phi = std::exp(-(r - mean) * (r - mean) / (2.0 * sd * sd)) / norm;
    // atan2 extends tan^{-1}(x2/x1) to the x1 = 0 edge (angle pi/2).
    double angle = std::atan2(x2, x1);
    double c = std::cos(angle);
    return 1.0 + std::pow(phi, 1.0 + c * c);
  });
}

std::pair<std::vector<Eigen::Vector2d>, Eigen::VectorXd> generate(const Field& field, int n,
                                                                  double noise_sd,
                                                                  std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample size must be at least 1");
  if (noise_sd < 0.0) throw std::invalid_argument("noise standard deviation must be >= 0");
  Rng rng(seed);
  std::vector<Eigen::Vector2d> xs;
  xs.reserve(n);
  Eigen::VectorXd ys(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector2d x(rng.uniform(), rng.uniform());
    xs.push_back(x);
    ys[i] = field.value(x) + noise_sd * rng.normal();
  }
  return {std::move(xs), std::move(ys)};
}

Filament reference_filament(const Field& field, const ScmsConfig& cfg, int workers) {
  return scms(field, cfg, workers);
}

}  // namespace filament
