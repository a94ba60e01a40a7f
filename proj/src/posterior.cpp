#include "filament/posterior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "filament/rng.hpp"

namespace filament {

PriorSpec PriorSpec::standard(int dim) {
  PriorSpec prior;
  prior.theta0 = Eigen::VectorXd::Zero(dim);
  prior.lambda0_diag = Eigen::VectorXd::Ones(dim);
  return prior;
}

PriorSpec PriorSpec::empirical(int dim, double y_mean, double scale) {
  PriorSpec prior;
  prior.theta0 = Eigen::VectorXd::Constant(dim, y_mean);
  prior.lambda0_diag = Eigen::VectorXd::Constant(dim, scale);
  return prior;
}

void PriorSpec::validate(int dim) const {
  if (theta0.size() != dim || lambda0_diag.size() != dim) {
    throw std::invalid_argument("prior dimension does not match basis dimension");
  }
  if (!(lambda0_diag.array() > 0.0).all() || !lambda0_diag.allFinite()) {
    throw std::invalid_argument("prior variance diagonal must be positive and finite");
  }
  if (!theta0.allFinite()) {
    throw std::invalid_argument("prior mean must be finite");
  }
}

namespace {

Eigen::LLT<Eigen::MatrixXd> precision_llt(const Eigen::MatrixXd& design,
                                          const PriorSpec& prior) {
  const Eigen::Index p = design.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  a.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  a += prior.lambda0_diag.cwiseInverse().asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(a.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("Cholesky factorization of the precision matrix failed");
  }
  return llt;
}

double sigma2_from_llt(const Eigen::MatrixXd& design, const PriorSpec& prior,
                       const Eigen::VectorXd& y, const Eigen::LLT<Eigen::MatrixXd>& llt) {
  // (B L0 B^T + I)^{-1} = I - B (L0^{-1} + B^T B)^{-1} B^T, so the quadratic
  // form needs only a p x p solve.
  Eigen::VectorXd r0 = y - design * prior.theta0;
  Eigen::VectorXd btr = design.transpose() * r0;
  double q = r0.squaredNorm() - btr.dot(llt.solve(btr));
  double sigma2 = q / static_cast<double>(y.size());
  return sigma2 > 0.0 ? sigma2 : 0.0;
}

void check_data(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  if (design.rows() == 0) throw std::invalid_argument("fit requires at least one observation");
  if (design.rows() != y.size()) {
    throw std::invalid_argument("design rows and response length differ");
  }
  if (!y.allFinite()) throw std::invalid_argument("response contains non-finite values");
}

}  // namespace

LinearFit fit_linear(const Eigen::MatrixXd& design, const PriorSpec& prior,
                     const Eigen::VectorXd& y) {
  check_data(design, y);
  prior.validate(static_cast<int>(design.cols()));
  auto llt = precision_llt(design, prior);
  LinearFit out;
  Eigen::VectorXd rhs =
      design.transpose() * y + prior.lambda0_diag.cwiseInverse().cwiseProduct(prior.theta0);
  out.mean = llt.solve(rhs);
  out.chol = llt.matrixL();
  out.log_det_precision = 2.0 * out.chol.diagonal().array().log().sum();
  out.sigma2_hat = sigma2_from_llt(design, prior, y, llt);
  return out;
}

double empirical_bayes_sigma2(const Eigen::MatrixXd& design, const PriorSpec& prior,
                              const Eigen::VectorXd& y) {
  check_data(design, y);
  prior.validate(static_cast<int>(design.cols()));
  return sigma2_from_llt(design, prior, y, precision_llt(design, prior));
}

ModelScore log_model_score_linear(const Eigen::MatrixXd& design, const PriorSpec& prior,
                                  const Eigen::VectorXd& y) {
  LinearFit f = fit_linear(design, prior, y);
  ModelScore score;
  if (f.sigma2_hat <= 0.0) {
    score.value = std::numeric_limits<double>::infinity();
    score.interpolation_warning = true;
    return score;
  }
  double n = static_cast<double>(y.size());
  double log_det_marginal = f.log_det_precision + prior.lambda0_diag.array().log().sum();
  score.value = -n * std::log(f.sigma2_hat) - log_det_marginal;
  return score;
}

FittedPosterior::FittedPosterior(BasisSpec spec, PriorSpec prior, LinearFit fit, int n)
    : spec_(std::move(spec)), prior_(std::move(prior)), fit_(std::move(fit)), n_(n) {}

FittedPosterior fit(const BasisSpec& spec, const PriorSpec& prior,
                    const std::vector<Eigen::Vector2d>& xs, const Eigen::VectorXd& ys) {
  Eigen::MatrixXd design = spec.design_matrix(xs);
  return FittedPosterior(spec, prior, fit_linear(design, prior, ys),
                         static_cast<int>(xs.size()));
}

ModelScore log_model_score(const BasisSpec& spec, const PriorSpec& prior,
                           const std::vector<Eigen::Vector2d>& xs, const Eigen::VectorXd& ys) {
  return log_model_score_linear(spec.design_matrix(xs), prior, ys);
}

SelectionResult select_j(const std::vector<std::pair<int, int>>& candidates, int q1, int q2,
                         const PriorBuilder& prior_builder,
                         const std::vector<Eigen::Vector2d>& xs, const Eigen::VectorXd& ys) {
  if (candidates.empty()) throw std::invalid_argument("select_j requires candidates");
  SelectionResult result;
  result.candidates = candidates;
  result.scores.reserve(candidates.size());
  std::size_t best = 0;
  // (no warning, score) beats (warning, anything); ties by smaller J1*J2
  // then smaller J1.
  auto better = [&](std::size_t a, std::size_t b) {
    const ModelScore& sa = result.scores[a];
    const ModelScore& sb = result.scores[b];
    if (sa.interpolation_warning != sb.interpolation_warning) {
      return !sa.interpolation_warning;
    }
    if (!sa.interpolation_warning && sa.value != sb.value) return sa.value > sb.value;
    long pa = static_cast<long>(candidates[a].first) * candidates[a].second;
    long pb = static_cast<long>(candidates[b].first) * candidates[b].second;
    if (pa != pb) return pa < pb;
    return candidates[a].first < candidates[b].first;
  };
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto [j1, j2] = candidates[i];
    BasisSpec spec(make_uniform_knots(q1, j1), make_uniform_knots(q2, j2));
    PriorSpec prior = prior_builder(spec.dimension());
    result.scores.push_back(log_model_score(spec, prior, xs, ys));
    if (i > 0 && better(i, best)) best = i;
  }
  result.chosen = candidates[best];
  return result;
}

Eigen::MatrixXd sample_theta(const FittedPosterior& post, double sigma2, std::uint64_t seed,
                             int count) {
  if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be nonnegative");
  const Eigen::Index p = post.mean_theta().size();
  double sigma = std::sqrt(sigma2);
  Rng rng(seed);
  Eigen::MatrixXd draws(count, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) z[k] = rng.normal();
    // Covariance sigma^2 A^{-1} = sigma^2 L^{-T} L^{-1}.
    post.precision_chol().transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    draws.row(i) = (post.mean_theta() + sigma * z).transpose();
  }
  return draws;
}

}  // namespace filament
