#include "filament/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <limits>

#include "filament/metrics.hpp"
#include "filament/parallel.hpp"
#include "filament/rng.hpp"

namespace filament {

void CredibleSpec::validate() const {
  if (!(gamma > 0.0 && gamma < 0.5)) throw std::invalid_argument("gamma must lie in (0, 0.5)");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  for (double r : r_quantiles) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("band quantiles must be nonnegative and finite");
    }
  }
}

namespace {

Eigen::Vector2d clamp_unit(const Eigen::Vector2d& x) {
  return {std::min(1.0, std::max(0.0, x[0])), std::min(1.0, std::max(0.0, x[1]))};
}

// Grid scan plus backtracking ascent, shared by the sup-norm and gradient-sup
// searches.
SupNormEstimate grid_ascent_max(const std::function<double(const Eigen::Vector2d&)>& objective,
                                int grid_n) {
  if (grid_n < 8) throw std::invalid_argument("grid_n must be at least 8");
  SupNormEstimate est;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      Eigen::Vector2d x(static_cast<double>(i) / (grid_n - 1),
                        static_cast<double>(j) / (grid_n - 1));
      double v = objective(x);
      if (v > est.value) {
        est.value = v;
        est.argmax = x;
      }
    }
  }
  const double fd = 1e-6;
  double step0 = 1.0 / (grid_n - 1);
  Eigen::Vector2d x = est.argmax;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::Vector2d g;
    for (int axis = 0; axis < 2; ++axis) {
      Eigen::Vector2d hi = x, lo = x;
      hi[axis] = std::min(1.0, x[axis] + fd);
      lo[axis] = std::max(0.0, x[axis] - fd);
      double span = hi[axis] - lo[axis];
      g[axis] = span > 0.0 ? (objective(hi) - objective(lo)) / span : 0.0;
    }
    double gn = g.norm();
    if (gn == 0.0) break;
    bool improved = false;
    for (double step = step0; step > 1e-16; step *= 0.5) {
      Eigen::Vector2d cand = clamp_unit(x + (step / gn) * g);
      double v = objective(cand);
      if (v > est.value) {
        double gain = v - est.value;
        est.value = v;
        est.argmax = cand;
        est.refined = true;
        x = cand;
        improved = gain >= 1e-12;
        break;
      }
    }
    if (!improved) break;
  }
  return est;
}

}  // namespace

SupNormEstimate sup_norm_diff(const ScalarField& a, const ScalarField& b, int r1, int r2,
                              int grid_n) {
  if (a.spec().dimension() != b.spec().dimension() ||
      a.spec().axis(0).order() != b.spec().axis(0).order() ||
      a.spec().axis(1).order() != b.spec().axis(1).order() ||
      a.spec().axis(0).knots() != b.spec().axis(0).knots() ||
      a.spec().axis(1).knots() != b.spec().axis(1).knots()) {
    throw std::invalid_argument("sup_norm_diff requires fields on the same basis");
  }
  ScalarField delta(a.spec(), a.theta() - b.theta());
  return grid_ascent_max(
      [&](const Eigen::Vector2d& x) { return std::abs(delta.deriv(x, r1, r2)); }, grid_n);
}

double empirical_quantile(std::vector<double> values, double gamma) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  std::size_t m = values.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil((1.0 - gamma) * static_cast<double>(m)));
  if (rank < 1) rank = 1;
  if (rank > m) rank = m;
  return values[rank - 1];
}

PosteriorSupSamples estimate_r_quantiles(const FittedPosterior& post, int sample_count,
                                         double gamma, int grid_n, std::uint64_t seed,
                                         int workers) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be at least 1");
  PosteriorSupSamples out;
  out.sup.resize(sample_count, 3);
  ScalarField center(post.spec(), post.mean_theta());
  parallel_for(static_cast<std::size_t>(sample_count), workers, [&](std::size_t i) {
    Eigen::MatrixXd draw = sample_theta(post, post.sigma2_hat(),
                                        Rng::derive_seed(seed, i), 1);
    ScalarField candidate(post.spec(), draw.row(0).transpose());
    for (int k = 0; k < 3; ++k) {
      out.sup(static_cast<Eigen::Index>(i), k) =
          sup_norm_diff(candidate, center, kBandDerivatives[k][0], kBandDerivatives[k][1],
                        grid_n)
              .value;
    }
  });
  for (int k = 0; k < 3; ++k) {
    std::vector<double> column(out.sup.col(k).data(), out.sup.col(k).data() + sample_count);
    out.quantiles[k] = empirical_quantile(std::move(column), gamma);
  }
  return out;
}

BandCheck in_band(const ScalarField& candidate, const ScalarField& center,
                  const CredibleSpec& spec, int grid_n) {
  BandCheck check;
  check.all = true;
  for (int k = 0; k < 3; ++k) {
    double sup =
        sup_norm_diff(candidate, center, kBandDerivatives[k][0], kBandDerivatives[k][1], grid_n)
            .value;
    check.per_k[k] = sup <= spec.rho * spec.r_quantiles[k];
    check.all = check.all && check.per_k[k];
  }
  return check;
}

CredibleFilaments credible_filaments(const FittedPosterior& post, const CredibleSpec& spec,
                                     const ScmsConfig& scms_cfg, int sample_count,
                                     std::uint64_t seed, int grid_n, int workers) {
  spec.validate();
  CredibleFilaments out;
  if (sample_count <= 0) return out;
  ScalarField center(post.spec(), post.mean_theta());
  out.accepted.assign(sample_count, false);
  std::vector<Filament> buffer(sample_count);
  parallel_for(static_cast<std::size_t>(sample_count), workers, [&](std::size_t i) {
    Eigen::MatrixXd draw = sample_theta(post, post.sigma2_hat(),
                                        Rng::derive_seed(seed, i), 1);
    ScalarField candidate(post.spec(), draw.row(0).transpose());
    if (in_band(candidate, center, spec, grid_n).all) {
      out.accepted[i] = true;
      buffer[i] = scms(candidate, scms_cfg, 1);
    }
  });
  int n_accept = 0;
  for (int i = 0; i < sample_count; ++i) {
    if (out.accepted[i]) {
      out.filaments.push_back(std::move(buffer[i]));
      ++n_accept;
    }
  }
  out.acceptance_fraction = static_cast<double>(n_accept) / sample_count;
  return out;
}

bool in_hausdorff_ball(const Filament& candidate, const Filament& center,
                       const CredibleSpec& spec) {
  double radius = spec.c_over_eta * spec.rho *
                  *std::max_element(spec.r_quantiles.begin(), spec.r_quantiles.end());
  return hausdorff(candidate.converged_points(), center.converged_points()) <= radius;
}

double estimate_c_over_eta(const Field& field, const Filament& filament, int grid_n) {
  double eta = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < filament.size(); ++i) {
    if (filament.status[i] != PointStatus::converged) continue;
    any = true;
    if (filament.lambda[i] >= 0.0) {
      throw std::runtime_error(
          "filament has a converged point with nonnegative smallest eigenvalue");
    }
    eta = std::min(eta, -filament.lambda[i]);
  }
  if (!any) throw std::runtime_error("cannot estimate eta from a filament with no converged points");
  SupNormEstimate c = grid_ascent_max(
      [&](const Eigen::Vector2d& x) { return field.jet2(x).gradient.norm(); }, grid_n);
  return c.value / eta;
}

}  // namespace filament
