#include "filament/ridge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "filament/parallel.hpp"

namespace filament {

namespace {

Eigen::Vector2d clamp_unit(const Eigen::Vector2d& x) {
  return {std::min(1.0, std::max(0.0, x[0])), std::min(1.0, std::max(0.0, x[1]))};
}

constexpr int kMaxClampStreak = 10;

}  // namespace

const char* to_string(PointStatus status) {
  switch (status) {
    case PointStatus::converged: return "converged";
    case PointStatus::max_iter: return "max_iter";
    case PointStatus::discarded_tau: return "discarded_tau";
    case PointStatus::diverged: return "diverged";
  }
  return "unknown";
}

PointStatus point_status_from_string(const std::string& name) {
  if (name == "converged") return PointStatus::converged;
  if (name == "max_iter") return PointStatus::max_iter;
  if (name == "discarded_tau") return PointStatus::discarded_tau;
  if (name == "diverged") return PointStatus::diverged;
  throw std::invalid_argument("unknown point status: " + name);
}

std::vector<Eigen::Vector2d> ScmsConfig::grid_seeds(int per_axis) {
  if (per_axis < 2) throw std::invalid_argument("seed grid needs at least 2 points per axis");
  // Cell-centered lattice. Seeds exactly on the square's edges can sit on
  // symmetry lines of a surface where the projected gradient vanishes
  // identically, turning a measure-zero basin into spurious output points.
  std::vector<Eigen::Vector2d> seeds;
  seeds.reserve(static_cast<std::size_t>(per_axis) * per_axis);
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      seeds.emplace_back((i + 0.5) / per_axis, (j + 0.5) / per_axis);
    }
  }
  return seeds;
}

void ScmsConfig::validate() const {
  if (!(step_a > 0.0)) throw std::invalid_argument("step_a must be positive");
  if (!(tol_eps > 0.0)) throw std::invalid_argument("tol_eps must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
}

std::vector<Eigen::Vector2d> Filament::converged_points() const {
  std::vector<Eigen::Vector2d> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (status[i] == PointStatus::converged) out.push_back(points[i]);
  }
  return out;
}

Eigen::Vector2d scms_step(const Field& field, const Eigen::Vector2d& x, double step_a,
                          bool* clamped) {
  Jet2 jet = field.jet2(x);
  EigenFrame frame = eigen_min(jet.f20, jet.f11, jet.f02);
  Eigen::Vector2d raw = x + step_a * frame.v.dot(jet.gradient) * frame.v;
  Eigen::Vector2d next = clamp_unit(raw);
  if (clamped) *clamped = (next != raw);
  return next;
}

namespace {

struct RunResult {
  Eigen::Vector2d point;
  PointStatus status;
  double lambda;
  StopClause clause;
  int iterations;
};

RunResult run_seed(const Field& field, const ScmsConfig& cfg, const Eigen::Vector2d& seed) {
  RunResult r{clamp_unit(seed), PointStatus::max_iter, 0.0, StopClause::none, 0};
  if (field.value(r.point) <= cfg.threshold_tau) {
    r.status = PointStatus::discarded_tau;
    Jet2 jet = field.jet2(r.point);
    r.lambda = eigen_min(jet.f20, jet.f11, jet.f02).lambda_min;
    return r;
  }
  Eigen::Vector2d x = r.point;
  int clamp_streak = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Jet2 jet = field.jet2(x);
    EigenFrame frame = eigen_min(jet.f20, jet.f11, jet.f02);
    double vg = frame.v.dot(jet.gradient);
    Eigen::Vector2d raw = x + cfg.step_a * vg * frame.v;
    Eigen::Vector2d next = clamp_unit(raw);
    r.iterations = it;
    if (next != raw) {
      if (++clamp_streak > kMaxClampStreak) {
        x = next;
        r.status = PointStatus::diverged;
        break;
      }
    } else {
      clamp_streak = 0;
    }
    x = next;
    // Convergence uses the unclamped step length |a vg| (the frame vector is
    // unit) so a wall-pinned iterate does not read as converged.
    double step_norm = std::abs(cfg.step_a * vg);
    if (step_norm < cfg.tol_eps) {
      r.status = PointStatus::converged;
      r.clause = StopClause::step_size;
      break;
    }
    if (std::abs(vg) < cfg.tol_eps) {
      r.status = PointStatus::converged;
      r.clause = StopClause::residual;
      break;
    }
  }
  r.point = x;
  Jet2 jet = field.jet2(x);
  r.lambda = eigen_min(jet.f20, jet.f11, jet.f02).lambda_min;
  return r;
}

}  // namespace

Filament scms(const Field& field, const ScmsConfig& cfg, int workers) {
  cfg.validate();
  Filament fil;
  fil.points.resize(cfg.seeds.size());
  fil.status.resize(cfg.seeds.size());
  fil.lambda.resize(cfg.seeds.size());
  fil.clause.resize(cfg.seeds.size());
  fil.iterations.resize(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), workers, [&](std::size_t i) {
    RunResult r = run_seed(field, cfg, cfg.seeds[i]);
    fil.points[i] = r.point;
    fil.status[i] = r.status;
    fil.lambda[i] = r.lambda;
    fil.clause[i] = r.clause;
    fil.iterations[i] = r.iterations;
  });
  return fil;
}

namespace {

// V at x (clamped into the domain), sign-aligned with prev.
Eigen::Vector2d aligned_direction(const Field& field, const Eigen::Vector2d& x,
                                  const Eigen::Vector2d& prev) {
  Eigen::Vector2d v = eigen_frame(field, clamp_unit(x)).v;
  return v.dot(prev) < 0.0 ? Eigen::Vector2d(-v) : v;
}

Eigen::Vector2d rk4_step(const Field& field, const Eigen::Vector2d& x, double h,
                         const Eigen::Vector2d& prev) {
  Eigen::Vector2d k1 = aligned_direction(field, x, prev);
  Eigen::Vector2d k2 = aligned_direction(field, x + 0.5 * h * k1, prev);
  Eigen::Vector2d k3 = aligned_direction(field, x + 0.5 * h * k2, prev);
  Eigen::Vector2d k4 = aligned_direction(field, x + h * k3, prev);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct ResidualEval {
  double residual;
  double lambda;
};

ResidualEval aligned_residual(const Field& field, const Eigen::Vector2d& x,
                              const Eigen::Vector2d& prev) {
  Eigen::Vector2d xc = clamp_unit(x);
  Jet2 jet = field.jet2(xc);
  EigenFrame frame = eigen_min(jet.f20, jet.f11, jet.f02);
  Eigen::Vector2d v = frame.v.dot(prev) < 0.0 ? Eigen::Vector2d(-frame.v) : frame.v;
  return {v.dot(jet.gradient), frame.lambda_min};
}

bool in_unit_square(const Eigen::Vector2d& x) {
  return x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0;
}

}  // namespace

IntegralCurve trace_integral_curve(const Field& field, const Eigen::Vector2d& x0, double t_max,
                                   double dt, int time_sign) {
  if (!(dt > 0.0) || !(t_max > 0.0)) {
    throw std::invalid_argument("t_max and dt must be positive");
  }
  if (!in_unit_square(x0)) throw std::domain_error("integral curve start outside [0,1]^2");
  IntegralCurve curve;
  curve.start = x0;
  curve.time_sign = time_sign;
  Eigen::Vector2d dir = eigen_frame(field, x0).v;
  if (time_sign < 0) dir = -dir;

  curve.times.push_back(0.0);
  curve.states.push_back(x0);

  ResidualEval at_start = aligned_residual(field, x0, dir);
  if (std::abs(at_start.residual) <= 1e-12 * std::max(1.0, grad(field, x0).norm()) &&
      at_start.lambda < 0.0) {
    curve.hit = Hit{0.0, x0};
  }

  double t = 0.0;
  Eigen::Vector2d x = x0;
  while (t < t_max - 1e-15) {
    double h = std::min(dt, t_max - t);
    // The start residual is re-evaluated under the segment's own alignment
    // so the bracket below is consistent with the bisection probes.
    double prev_res = aligned_residual(field, x, dir).residual;
    Eigen::Vector2d x_next = rk4_step(field, x, h, dir);
    ResidualEval next = aligned_residual(field, x_next, dir);
    bool crossed = (prev_res > 0.0 && next.residual <= 0.0) ||
                   (prev_res < 0.0 && next.residual >= 0.0);
    if (crossed && !curve.hit) {
      // Bisect the step size until the crossing is resolved.
      double lo = 0.0, hi = h;
      Eigen::Vector2d x_hit = x_next;
      double res_hit = next.residual;
      double lambda_hit = next.lambda;
      for (int iter = 0; iter < 60 && std::abs(res_hit) > 1e-10; ++iter) {
        double mid = 0.5 * (lo + hi);
        Eigen::Vector2d x_mid = rk4_step(field, x, mid, dir);
        ResidualEval r_mid = aligned_residual(field, x_mid, dir);
        bool same_side = (prev_res > 0.0) == (r_mid.residual > 0.0) && r_mid.residual != 0.0;
        if (same_side) {
          lo = mid;
        } else {
          hi = mid;
          x_hit = x_mid;
          res_hit = r_mid.residual;
          lambda_hit = r_mid.lambda;
        }
      }
      // Accept only a resolved zero. A sign change that bisection cannot
      // drive to zero is a jump of the residual (the eigenvector rotating
      // through a near-degenerate Hessian), not a ridge crossing.
      bool resolved =
          std::abs(res_hit) <= 1e-9 * std::max(1.0, grad(field, clamp_unit(x_hit)).norm());
      if (lambda_hit < 0.0 && resolved) {
        curve.hit = Hit{t + hi, clamp_unit(x_hit)};
      }
    }
    if (!in_unit_square(x_next)) break;
    t += h;
    x = x_next;
    dir = aligned_direction(field, x, dir);
    curve.times.push_back(t);
    curve.states.push_back(x);
  }
  return curve;
}

std::optional<Hit> hitting_time(const IntegralCurve& curve) { return curve.hit; }

std::optional<Hit> nearest_hit(const Field& field, const Eigen::Vector2d& x0, double t_max,
                               double dt) {
  IntegralCurve forward = trace_integral_curve(field, x0, t_max, dt, +1);
  IntegralCurve backward = trace_integral_curve(field, x0, t_max, dt, -1);
  std::optional<Hit> best;
  if (forward.hit) best = forward.hit;
  if (backward.hit) {
    Hit rev{-backward.hit->t, backward.hit->point};
    if (!best || std::abs(rev.t) < std::abs(best->t)) best = rev;
  }
  return best;
}

}  // namespace filament
