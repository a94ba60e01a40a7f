#ifndef FILAMENT_CLI_HPP
#define FILAMENT_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "filament/io.hpp"

namespace filament {

inline constexpr const char* kVersion = "0.1.0";

// Parameters for every pipeline stage. Serialized as a strict JSON document:
// unknown keys are fatal.
struct RunConfig {
  // data
  int n = 2000;
  double noise_sd = 0.1;
  std::string csv;  // input for fit/select; empty means <out_dir>/dataset.csv
  CsvColumns columns;
  bool header = true;
  bool rescale = false;

  // spline
  int q1 = 5, q2 = 5;
  int j1 = 9, j2 = 9;

  // prior
  double prior_scale = 5.0;       // Lambda0 = prior_scale * I
  bool prior_center_mean = true;  // theta0 = mean(y) * ones (else zero)

  // select (diagonal J1 = J2 candidates)
  int j_min = 7, j_max = 15;

  // scms
  double step_a = 0.02;
  double tol_eps = 1e-6;
  double tau = 2.0;
  int max_iter = 5000;
  int seed_grid = 50;

  // credible
  double gamma = 0.1;
  double rho = 1.2;
  int draws = 200;
  int grid_n = 64;
  double c_over_eta = 0.0;  // 0 means estimate from the fitted surface
  bool emit_samples = true;

  void validate() const;
};

RunConfig preset_config(const std::string& name);  // "paper-sim" or "paper-quake"
RunConfig load_config(const std::string& path, RunConfig base);

// Entry point shared by the binary and the tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args);

}  // namespace filament

#endif  // FILAMENT_CLI_HPP
