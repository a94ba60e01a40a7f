#ifndef FILAMENT_UNCERTAINTY_HPP
#define FILAMENT_UNCERTAINTY_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "filament/field.hpp"
#include "filament/posterior.hpp"
#include "filament/ridge.hpp"

namespace filament {

// The three second-order derivative bands are indexed k = 1, 2, 3 for
// r = (2,0), (1,1), (0,2).
inline constexpr std::array<std::array<int, 2>, 3> kBandDerivatives = {{{2, 0}, {1, 1}, {0, 2}}};

struct CredibleSpec {
  double gamma = 0.1;                          // credibility complement, in (0, 0.5)
  double rho = 1.2;                            // band inflation, > 1
  std::array<double, 3> r_quantiles = {0, 0, 0};  // R_{n,k,gamma} for k = 1..3
  double c_over_eta = 0.0;                     // Hausdorff-ball radius scale

  void validate() const;
};

struct SupNormEstimate {
  double value = 0.0;
  Eigen::Vector2d argmax = Eigen::Vector2d::Zero();
  bool refined = false;  // true when local ascent improved on the grid
};

// sup over [0,1]^2 of |D^r(a - b)|: coarse grid of grid_n x grid_n points,
// then ascent from the grid argmax with a finite-difference gradient and
// backtracking steps. The result is never below the grid maximum.
SupNormEstimate sup_norm_diff(const ScalarField& a, const ScalarField& b, int r1, int r2,
                              int grid_n);

// Order statistic ceil((1 - gamma) m) of the values (1-indexed, ties toward
// the larger value).
double empirical_quantile(std::vector<double> values, double gamma);

struct PosteriorSupSamples {
  Eigen::MatrixXd sup;                 // sample_count x 3, per-draw suprema
  std::array<double, 3> quantiles{};   // empirical (1 - gamma) quantiles
};

// Draws sample_count coefficient vectors at sigma^2 = sigma2_hat and
// collects the sup-norm deviation of each second-derivative field from the
// posterior-mean field. Draw i uses the stream derived from seed by i, so
// results do not depend on the worker count.
PosteriorSupSamples estimate_r_quantiles(const FittedPosterior& post, int sample_count,
                                         double gamma, int grid_n, std::uint64_t seed,
                                         int workers = 1);

struct BandCheck {
  std::array<bool, 3> per_k = {false, false, false};
  bool all = false;
};

// candidate lies in every band: sup |D^r(candidate - center)| <= rho * R_k.
BandCheck in_band(const ScalarField& candidate, const ScalarField& center,
                  const CredibleSpec& spec, int grid_n);

struct CredibleFilaments {
  std::vector<Filament> filaments;  // one per accepted draw, in draw order
  std::vector<bool> accepted;       // per draw
  double acceptance_fraction = 0.0;
};

CredibleFilaments credible_filaments(const FittedPosterior& post, const CredibleSpec& spec,
                                     const ScmsConfig& scms_cfg, int sample_count,
                                     std::uint64_t seed, int grid_n, int workers = 1);

// Haus(candidate, center) <= (C/eta) * rho * max_k R_k, over converged points.
bool in_hausdorff_ball(const Filament& candidate, const Filament& center,
                       const CredibleSpec& spec);

// C = sup ||grad f|| over the square (grid + ascent), eta = min over the
// filament's converged points of -lambda. Errors if the filament has no
// converged points or any of them has lambda >= 0.
double estimate_c_over_eta(const Field& field, const Filament& filament, int grid_n = 64);

}  // namespace filament

#endif  // FILAMENT_UNCERTAINTY_HPP
