#ifndef FILAMENT_RIDGE_HPP
#define FILAMENT_RIDGE_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "filament/field.hpp"

namespace filament {

enum class PointStatus { converged, max_iter, discarded_tau, diverged };
enum class StopClause { none, step_size, residual };

const char* to_string(PointStatus status);
PointStatus point_status_from_string(const std::string& name);

struct ScmsConfig {
  double step_a = 0.02;        // gradient-to-step scale
  double tol_eps = 1e-6;       // stop tolerance for step length / projected gradient
  double threshold_tau = 0.0;  // seeds with f <= tau are discarded
  int max_iter = 5000;
  std::vector<Eigen::Vector2d> seeds;

  // Uniform lattice over [0,1]^2 including the boundary.
  static std::vector<Eigen::Vector2d> grid_seeds(int per_axis);
  void validate() const;
};

// Unordered endpoint cloud of the per-seed SCMS runs. Entry i corresponds to
// seed i; lambda holds the smaller Hessian eigenvalue at the final iterate.
struct Filament {
  std::vector<Eigen::Vector2d> points;
  std::vector<PointStatus> status;
  std::vector<double> lambda;
  std::vector<StopClause> clause;
  std::vector<int> iterations;

  std::size_t size() const { return points.size(); }
  std::vector<Eigen::Vector2d> converged_points() const;
};

// One update x + a V V^T grad f (x), clamped to [0,1]^2. The projector
// V V^T makes the step independent of the eigenvector sign.
Eigen::Vector2d scms_step(const Field& field, const Eigen::Vector2d& x, double step_a,
                          bool* clamped = nullptr);

// Subspace constrained mean shift over cfg.seeds. Stops a run when the
// unclamped step length or the projected gradient falls below tol_eps;
// more than 10 consecutive clamped iterates marks the run diverged.
Filament scms(const Field& field, const ScmsConfig& cfg, int workers = 1);

struct Hit {
  double t = 0.0;
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
};

struct IntegralCurve {
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  int time_sign = +1;  // +1 traces along V(x0), -1 against it
  std::vector<double> times;  // nonnegative, increasing
  std::vector<Eigen::Vector2d> states;
  std::optional<Hit> hit;  // first ridge crossing (lambda < 0) along the trace
};

// Fixed-step RK4 on dx/dt = V(x) with V sign-aligned to the previous
// direction. Stops at t_max or when the state leaves [0,1]^2. Ridge
// crossings are detected by sign change of the aligned residual and
// refined by bisection to |residual| < 1e-10 or 60 halvings.
IntegralCurve trace_integral_curve(const Field& field, const Eigen::Vector2d& x0, double t_max,
                                   double dt, int time_sign = +1);

std::optional<Hit> hitting_time(const IntegralCurve& curve);

// Traces both time directions and returns the crossing with the smallest
// |t|; t is negative when it lies against the initial eigenvector.
std::optional<Hit> nearest_hit(const Field& field, const Eigen::Vector2d& x0, double t_max,
                               double dt);

}  // namespace filament

#endif  // FILAMENT_RIDGE_HPP
