#include "filament/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace filament {

double directed_distance(const std::vector<Eigen::Vector2d>& a,
                         const std::vector<Eigen::Vector2d>& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("directed distance is undefined for empty point sets");
  }
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) {
      double d2 = (p - q).squaredNorm();
      if (d2 < best) best = d2;
    }
    if (best > worst) worst = best;
  }
  return std::sqrt(worst);
}

double hausdorff(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b) {
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

}  // namespace filament
