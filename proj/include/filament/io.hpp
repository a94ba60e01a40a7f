#ifndef FILAMENT_IO_HPP
#define FILAMENT_IO_HPP

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "filament/posterior.hpp"
#include "filament/ridge.hpp"

namespace filament {

// Affine map between an observed coordinate range and [0, 1].
struct AxisTransform {
  double lo = 0.0;
  double hi = 1.0;

  double to_unit(double x) const { return (x - lo) / (hi - lo); }
  double from_unit(double u) const { return lo + u * (hi - lo); }
};

using PlaneTransform = std::array<AxisTransform, 2>;

struct Dataset {
  std::vector<Eigen::Vector2d> xs;
  Eigen::VectorXd ys;
  std::optional<PlaneTransform> transform;  // set when coordinates were rescaled
};

struct CsvColumns {
  std::string x1 = "x1";
  std::string x2 = "x2";
  std::string y = "y";
};

// Reads three numeric columns. With header=true the columns are located by
// name; otherwise the first three columns are (x1, x2, y). With rescale,
// each coordinate's observed [min, max] is mapped onto [0, 1] and the
// transform is recorded; responses pass through untouched.
Dataset ingest_csv(const std::string& path, const CsvColumns& columns, bool rescale,
                   bool header = true);

void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path);  // unit-square data, no transform

// filament.csv: x1,x2,lambda,status with points mapped through the inverse
// transform when one is given.
void write_filament_csv(const std::string& path, const Filament& filament,
                        const std::optional<PlaneTransform>& transform);
Filament read_filament_csv(const std::string& path,
                           const std::optional<PlaneTransform>& transform);

// model.json: basis, prior, posterior mean/Cholesky, sigma2_hat, n and the
// coordinate transform. Round-trips exactly.
struct ModelFile {
  FittedPosterior posterior;
  std::optional<PlaneTransform> transform;
};

void write_model_json(const std::string& path, const FittedPosterior& post,
                      const std::optional<PlaneTransform>& transform);
ModelFile read_model_json(const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace filament

#endif  // FILAMENT_IO_HPP
