#ifndef FILAMENT_POSTERIOR_HPP
#define FILAMENT_POSTERIOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "filament/bspline.hpp"

namespace filament {

// Gaussian prior theta ~ N(theta0, sigma^2 * diag(lambda0_diag)).
struct PriorSpec {
  Eigen::VectorXd theta0;
  Eigen::VectorXd lambda0_diag;

  // theta0 = 0, Lambda0 = I.
  static PriorSpec standard(int dim);

  // theta0 = y_mean * ones (a clamped basis reproduces constants, so the
  // prior mean surface is the constant y_mean), Lambda0 = scale * I. Keeping
  // the response mean out of the empirical-Bayes residual stops the noise
  // estimate from absorbing the signal level.
  static PriorSpec empirical(int dim, double y_mean, double scale = 5.0);

  void validate(int dim) const;
};

// Core conjugate update in coefficient space. The posterior is
//   theta | data ~ N( A^{-1} (B^T y + Lambda0^{-1} theta0), sigma^2 A^{-1} ),
// with A = B^T B + Lambda0^{-1} factored as A = L L^T (lower Cholesky).
struct LinearFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower-triangular L
  double sigma2_hat = 0.0;
  double log_det_precision = 0.0;  // log det A
};

LinearFit fit_linear(const Eigen::MatrixXd& design, const PriorSpec& prior,
                     const Eigen::VectorXd& y);

// sigma2_hat = n^{-1} (y - B theta0)^T (B Lambda0 B^T + I)^{-1} (y - B theta0),
// computed in coefficient space through the Woodbury identity.
double empirical_bayes_sigma2(const Eigen::MatrixXd& design, const PriorSpec& prior,
                              const Eigen::VectorXd& y);

struct ModelScore {
  double value = 0.0;
  // Set when sigma2_hat collapsed to 0 (data equal the prior mean fit);
  // the score value is +inf and selection ranks such candidates last.
  bool interpolation_warning = false;
};

// -2n log sigma_hat - log det(B Lambda0 B^T + I_n), additive constant
// dropped; the determinant is reduced to coefficient space via
// det(B Lambda0 B^T + I) = det(A) det(Lambda0).
ModelScore log_model_score_linear(const Eigen::MatrixXd& design, const PriorSpec& prior,
                                  const Eigen::VectorXd& y);

class FittedPosterior {
 public:
  FittedPosterior(BasisSpec spec, PriorSpec prior, LinearFit fit, int n);

  const BasisSpec& spec() const { return spec_; }
  const PriorSpec& prior() const { return prior_; }
  const Eigen::VectorXd& mean_theta() const { return fit_.mean; }
  const Eigen::MatrixXd& precision_chol() const { return fit_.chol; }
  double sigma2_hat() const { return fit_.sigma2_hat; }
  double log_det_precision() const { return fit_.log_det_precision; }
  int n() const { return n_; }

 private:
  BasisSpec spec_;
  PriorSpec prior_;
  LinearFit fit_;
  int n_;
};

FittedPosterior fit(const BasisSpec& spec, const PriorSpec& prior,
                    const std::vector<Eigen::Vector2d>& xs, const Eigen::VectorXd& ys);

ModelScore log_model_score(const BasisSpec& spec, const PriorSpec& prior,
                           const std::vector<Eigen::Vector2d>& xs, const Eigen::VectorXd& ys);

using PriorBuilder = std::function<PriorSpec(int dim)>;

struct SelectionResult {
  std::pair<int, int> chosen;
  std::vector<std::pair<int, int>> candidates;
  std::vector<ModelScore> scores;
};

// Argmax of log_model_score over candidate (J1, J2) pairs with spline orders
// (q1, q2). Ties break toward smaller J1*J2, then smaller J1; candidates with
// an interpolation warning rank below all finite-scored ones.
SelectionResult select_j(const std::vector<std::pair<int, int>>& candidates, int q1, int q2,
                         const PriorBuilder& prior_builder,
                         const std::vector<Eigen::Vector2d>& xs, const Eigen::VectorXd& ys);

// count draws of theta = mean + sigma * L^{-T} z, z ~ N(0, I); one row per
// draw. Deterministic for a given seed.
Eigen::MatrixXd sample_theta(const FittedPosterior& post, double sigma2, std::uint64_t seed,
                             int count);

}  // namespace filament

#endif  // FILAMENT_POSTERIOR_HPP
