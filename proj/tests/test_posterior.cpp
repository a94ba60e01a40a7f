#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "filament/posterior.hpp"
#include "filament/rng.hpp"
#include "test_support.hpp"

using namespace filament;

namespace {

// Direct textbook formulas with explicit dense n x n inverses; the oracle
// for the coefficient-space implementation.
struct DenseOracle {
  Eigen::VectorXd mean;
  double sigma2;
  double score;

  DenseOracle(const Eigen::MatrixXd& design, const PriorSpec& prior, const Eigen::VectorXd& y) {
    Eigen::MatrixXd lambda0 = prior.lambda0_diag.asDiagonal();
    Eigen::MatrixXd a = lambda0.inverse() + design.transpose() * design;
    mean = a.inverse() * (design.transpose() * y + lambda0.inverse() * prior.theta0);
    Eigen::MatrixXd big = design * lambda0 * design.transpose() +
                          Eigen::MatrixXd::Identity(design.rows(), design.rows());
    Eigen::VectorXd r0 = y - design * prior.theta0;
    sigma2 = r0.dot(big.inverse() * r0) / static_cast<double>(y.size());
    score = -static_cast<double>(y.size()) * std::log(sigma2) - std::log(big.determinant());
  }
};

Eigen::MatrixXd random_design(Rng& rng, int n, int p) {
  Eigen::MatrixXd design(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) design(i, j) = rng.uniform();
  }
  return design;
}

PriorSpec random_prior(Rng& rng, int p) {
  PriorSpec prior;
  prior.theta0 = Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return rng.normal(); });
  prior.lambda0_diag =
      Eigen::VectorXd::NullaryExpr(p, [&](Eigen::Index) { return 0.5 + 2.0 * rng.uniform(); });
  return prior;
}

}  // namespace

TEST_CASE("scalar conjugate update") {
  Eigen::MatrixXd design(1, 1);
  design << 1.0;
  PriorSpec prior;
  prior.theta0 = Eigen::VectorXd::Zero(1);
  prior.lambda0_diag = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd y(1);
  y << 2.0;

  LinearFit f = fit_linear(design, prior, y);
  CHECK(f.mean[0] == doctest::Approx(1.0));
  CHECK(empirical_bayes_sigma2(design, prior, y) == doctest::Approx(2.0));
  ModelScore score = log_model_score_linear(design, prior, y);
  CHECK(score.value == doctest::Approx(-2.0 * std::log(2.0)));
  CHECK_FALSE(score.interpolation_warning);
}

TEST_CASE("prior mean is a fixed point") {
  Rng rng(3);
  Eigen::MatrixXd design = random_design(rng, 12, 5);
  PriorSpec prior = random_prior(rng, 5);
  Eigen::VectorXd y = design * prior.theta0;
  LinearFit f = fit_linear(design, prior, y);
  CHECK((f.mean - prior.theta0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.sigma2_hat == doctest::Approx(0.0));
}

TEST_CASE("dense oracle equivalence") {
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    int p = 2 + static_cast<int>(rng.uniform() * 14);  // <= 16
    int n = p + 1 + static_cast<int>(rng.uniform() * (49 - p));
    Eigen::MatrixXd design = random_design(rng, n, p);
    PriorSpec prior = random_prior(rng, p);
    Eigen::VectorXd y =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.normal(); });
    DenseOracle oracle(design, prior, y);
    LinearFit f = fit_linear(design, prior, y);
    CHECK((f.mean - oracle.mean).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, oracle.mean.cwiseAbs().maxCoeff()));
    CHECK(f.sigma2_hat == doctest::Approx(oracle.sigma2).epsilon(1e-10));
    ModelScore score = log_model_score_linear(design, prior, y);
    CHECK(score.value == doctest::Approx(oracle.score).epsilon(1e-8));
  }
}

TEST_CASE("cholesky factor reproduces the precision") {
  Rng rng(7);
  Eigen::MatrixXd design = random_design(rng, 20, 6);
  PriorSpec prior = random_prior(rng, 6);
  Eigen::VectorXd y =
      Eigen::VectorXd::NullaryExpr(20, [&](Eigen::Index) { return rng.normal(); });
  LinearFit f = fit_linear(design, prior, y);
  Eigen::MatrixXd a = prior.lambda0_diag.cwiseInverse().asDiagonal();
  a += design.transpose() * design;
  Eigen::MatrixXd recon = f.chol * f.chol.transpose();
  CHECK((recon - a).norm() / a.norm() < 1e-8);
  CHECK(f.log_det_precision == doctest::Approx(std::log(a.determinant())).epsilon(1e-9));
}

TEST_CASE("interpolation guard") {
  Rng rng(9);
  Eigen::MatrixXd design = random_design(rng, 8, 3);
  PriorSpec prior = random_prior(rng, 3);
  Eigen::VectorXd y = design * prior.theta0;
  ModelScore score = log_model_score_linear(design, prior, y);
  CHECK(score.interpolation_warning);
  CHECK(score.value == std::numeric_limits<double>::infinity());
}

TEST_CASE("marginal score penalizes a noise-interpolating basis") {
  // pure-noise response: the small basis wins the marginal score while the
  // near-interpolating one pays the determinant penalty
  Rng rng(21);
  std::vector<Eigen::Vector2d> xs;
  Eigen::VectorXd y(24);
  for (int i = 0; i < 24; ++i) {
    xs.emplace_back(rng.uniform(), rng.uniform());
    y[i] = rng.normal();
  }
  BasisSpec small = test::uniform_spec(2, 2);  // 4 coefficients
  BasisSpec big = test::uniform_spec(2, 4);    // 16 coefficients
  ModelScore s_small = log_model_score(small, PriorSpec::standard(small.dimension()), xs, y);
  ModelScore s_big = log_model_score(big, PriorSpec::standard(big.dimension()), xs, y);
  CHECK_FALSE(s_small.interpolation_warning);
  CHECK_FALSE(s_big.interpolation_warning);
  CHECK(s_big.value < s_small.value);
}

TEST_CASE("select_j basics and tie-breaking") {
  Rng rng(23);
  std::vector<Eigen::Vector2d> xs;
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    Eigen::Vector2d x(rng.uniform(), rng.uniform());
    xs.push_back(x);
    y[i] = std::sin(3.0 * x[0]) + x[1] + 0.05 * rng.normal();
  }

  SUBCASE("single candidate") {
    auto sel = select_j({{4, 5}}, 3, 3, PriorSpec::standard, xs, y);
    CHECK(sel.chosen == std::pair<int, int>(4, 5));
  }

  SUBCASE("ties break to smaller J1*J2 then smaller J1") {
    // A zero response equals the prior-mean fit, so every candidate carries
    // the interpolation flag and ranking falls through to the tie rules.
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(30);
    auto sel = select_j({{3, 3}, {2, 2}}, 2, 2, PriorSpec::standard, xs, zero);
    CHECK(sel.chosen == std::pair<int, int>(2, 2));
    auto sel2 = select_j({{3, 2}, {2, 3}}, 2, 2, PriorSpec::standard, xs, zero);
    CHECK(sel2.chosen == std::pair<int, int>(2, 3));
  }

  SUBCASE("argmax picks the best-scoring candidate") {
    auto sel = select_j({{3, 3}, {4, 4}, {5, 5}, {6, 6}}, 3, 3, PriorSpec::standard, xs, y);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : sel.scores) best = std::max(best, s.value);
    std::size_t idx = 0;
    for (; idx < sel.candidates.size(); ++idx) {
      if (sel.candidates[idx] == sel.chosen) break;
    }
    CHECK(sel.scores[idx].value == best);
  }
}

TEST_CASE("sample_theta statistics and determinism") {
  Rng rng(31);
  Eigen::MatrixXd design = random_design(rng, 10, 4);
  PriorSpec prior = PriorSpec::standard(4);
  Eigen::VectorXd y =
      Eigen::VectorXd::NullaryExpr(10, [&](Eigen::Index) { return rng.normal(); });
  BasisSpec spec = test::uniform_spec(2, 2);
  FittedPosterior post(spec, prior, fit_linear(design, prior, y), 10);

  SUBCASE("same seed gives identical draws") {
    Eigen::MatrixXd a = sample_theta(post, 0.7, 99, 5);
    Eigen::MatrixXd b = sample_theta(post, 0.7, 99, 5);
    CHECK(a == b);
  }

  SUBCASE("sigma -> 0 collapses to the mean") {
    Eigen::MatrixXd draws = sample_theta(post, 0.0, 1, 3);
    for (int i = 0; i < 3; ++i) {
      CHECK((draws.row(i).transpose() - post.mean_theta()).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  SUBCASE("sample covariance matches sigma^2 A^{-1}") {
    const double sigma2 = 0.9;
    const int m = 50000;
    Eigen::MatrixXd draws = sample_theta(post, sigma2, 17, m);
    Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / (m - 1);
    Eigen::MatrixXd a = prior.lambda0_diag.cwiseInverse().asDiagonal();
    a += design.transpose() * design;
    Eigen::MatrixXd target = sigma2 * a.inverse();
    CHECK((cov - target).norm() / target.norm() < 0.05);
  }

  SUBCASE("empirical mean converges at the Monte Carlo rate") {
    const double sigma2 = 1.3;
    const int m = 10000;
    Eigen::MatrixXd draws = sample_theta(post, sigma2, 77, m);
    Eigen::MatrixXd a = prior.lambda0_diag.cwiseInverse().asDiagonal();
    a += design.transpose() * design;
    Eigen::MatrixXd cov = sigma2 * a.inverse();
    Eigen::VectorXd mean_hat = draws.colwise().mean().transpose();
    for (int k = 0; k < 4; ++k) {
      double se = std::sqrt(cov(k, k) / m);
      CHECK(std::abs(mean_hat[k] - post.mean_theta()[k]) < 3.0 * se);
    }
  }
}

TEST_CASE("empirical prior centers on the response mean") {
  PriorSpec prior = PriorSpec::empirical(6, 1.7, 5.0);
  CHECK(prior.theta0 == Eigen::VectorXd::Constant(6, 1.7));
  CHECK(prior.lambda0_diag == Eigen::VectorXd::Constant(6, 5.0));
  // a clamped basis reproduces constants, so the prior-mean surface is flat
  BasisSpec spec = test::uniform_spec(3, 5);
  PriorSpec p2 = PriorSpec::empirical(spec.dimension(), 1.7);
  ScalarField prior_mean(spec, p2.theta0);
  CHECK(prior_mean.value({0.3, 0.8}) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("data validation") {
  PriorSpec prior = PriorSpec::standard(2);
  Eigen::MatrixXd design(2, 2);
  design << 1.0, 0.0, 0.0, 1.0;
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_linear(design, prior, bad), std::invalid_argument);
  Eigen::VectorXd short_y(1);
  short_y << 1.0;
  CHECK_THROWS_AS(fit_linear(design, prior, short_y), std::invalid_argument);
  PriorSpec bad_prior = prior;
  bad_prior.lambda0_diag[0] = 0.0;
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  CHECK_THROWS_AS(fit_linear(design, bad_prior, y), std::invalid_argument);
}
