#ifndef FILAMENT_METRICS_HPP
#define FILAMENT_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

namespace filament {

// d(A|B) = max over a in A of the distance to the nearest b in B.
double directed_distance(const std::vector<Eigen::Vector2d>& a,
                         const std::vector<Eigen::Vector2d>& b);

// max{ d(A|B), d(B|A) }.
double hausdorff(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b);

}  // namespace filament

#endif  // FILAMENT_METRICS_HPP
