// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace raretype::detail {

using Point2 = std::array<double, 2>;

struct SimplexResult {
  Point2 x{};
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Nelder-Mead minimization in two dimensions. Non-finite objective values are treated
// as +huge so the simplex retreats from them.
SimplexResult minimize_simplex(const std::function<double(const Point2&)>& f, const Point2& start,
                               const Point2& step, double size_tolerance, std::size_t max_iterations);

std::vector<double> hermite_nodes(std::size_t m);
std::vector<double> hermite_weights(std::size_t m);

}  // namespace raretype::detail
