#ifndef FILAMENT_SYNTH_HPP
#define FILAMENT_SYNTH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "filament/field.hpp"
#include "filament/ridge.hpp"

namespace filament {

// Closed-form ground-truth surface. Derivatives up to second order come
// from central finite differences; the step is small enough that the
// resulting error sits far below the statistical scales this field is
// compared against.
class AnalyticField final : public Field {
 public:
  explicit AnalyticField(std::function<double(double, double)> f, double fd_step = 1e-6);

  double value(const Eigen::Vector2d& x) const override { return f_(x[0], x[1]); }
  Jet2 jet2(const Eigen::Vector2d& x) const override;
  double deriv(const Eigen::Vector2d& x, int r1, int r2) const;  // |r| <= 2

 private:
  std::function<double(double, double)> f_;
  double step_;
};

// Ring-shaped test surface: 1 + phi(||x||)^(1 + cos^2 angle(x)) with phi the
// normal density with mean 0.5 and standard deviation 0.3. Its ridge is
// close to the arc of radius 0.5 inside the unit square.
AnalyticField ring_surface();

// n points uniform on [0,1]^2 with additive Gaussian noise on the response.
std::pair<std::vector<Eigen::Vector2d>, Eigen::VectorXd> generate(const Field& field, int n,
                                                                  double noise_sd,
                                                                  std::uint64_t seed);

// SCMS on the exact field; stands in for the true filament in comparisons.
Filament reference_filament(const Field& field, const ScmsConfig& cfg, int workers = 1);

}  // namespace filament

#endif  // FILAMENT_SYNTH_HPP
