// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "raretype/inference.hpp"

namespace raretype {

// (alpha, theta) or (phi, theta) with phi = n (1 - alpha) / (n + 1 + theta).
enum class Parametrization { AlphaTheta, PhiTheta };

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  double at(std::size_t i) const noexcept {
    return count <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
};

struct SurfaceGrid {
  Parametrization param = Parametrization::AlphaTheta;
  GridAxis first;   // alpha or phi
  GridAxis second;  // theta
};

struct SurfaceNode {
  double first = 0.0;
  double second = 0.0;
  double rel_loglik = 0.0;           // loglik minus loglik at the MLE
  double gaussian_rel_loglik = 0.0;  // -1/2 d' F d around the MLE
};

struct Surface {
  Parametrization param = Parametrization::AlphaTheta;
  std::array<double, 2> center{};
  Matrix2 fisher{};
  std::vector<SurfaceNode> nodes;  // first axis outer, second axis inner
};

// Maps between parametrizations for a partition of n+1 (n as in phi).
std::array<double, 2> to_phi_theta(double alpha, double theta, std::size_t n) noexcept;
std::array<double, 2> to_alpha_theta(double phi_value, double theta, std::size_t n) noexcept;

// Observed information carried to (phi, theta) by the Jacobian of the map.
Matrix2 fisher_phi_theta(const Matrix2& fisher_alpha_theta, double alpha, double theta, std::size_t n) noexcept;

// Relative log-likelihood of p (a partition of n+1) over the grid, with its Gaussian
// approximation from the MLE. Throws DomainError if a node leaves the valid region.
Surface loglik_surface(const IntegerPartition& p, const MleResult& mle, const SurfaceGrid& grid);

// Relative log-likelihood level of the coverage contour of a two-dimensional Gaussian
// (chi-square with 2 dof): log(1 - coverage).
double gaussian_contour_level(double coverage);

}  // namespace raretype
