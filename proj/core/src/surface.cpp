// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/surface.hpp"

#include <cmath>
#include <string>

namespace raretype {

std::array<double, 2> to_phi_theta(double alpha, double theta, std::size_t n) noexcept {
  const double nn = static_cast<double>(n);
  return {nn * (1.0 - alpha) / (nn + 1.0 + theta), theta};
}

std::array<double, 2> to_alpha_theta(double phi_value, double theta, std::size_t n) noexcept {
  const double nn = static_cast<double>(n);
  return {1.0 - phi_value * (nn + 1.0 + theta) / nn, theta};
}

Matrix2 fisher_phi_theta(const Matrix2& f, double alpha, double theta, std::size_t n) noexcept {
  const double nn = static_cast<double>(n);
  const double phi_value = nn * (1.0 - alpha) / (nn + 1.0 + theta);
  // d(alpha, theta) / d(phi, theta)
  const Matrix2 j{{{-(nn + 1.0 + theta) / nn, -phi_value / nn}, {0.0, 1.0}}};
  Matrix2 out{};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      double s = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += j[a][r] * f[a][b] * j[b][c];
      out[r][c] = s;
    }
  return out;
}

Surface loglik_surface(const IntegerPartition& p, const MleResult& mle, const SurfaceGrid& grid) {
  const std::size_t n = p.n() - 1;
  Surface s;
  s.param = grid.param;
  if (grid.param == Parametrization::AlphaTheta) {
    s.center = {mle.alpha_hat, mle.theta_hat};
    s.fisher = mle.observed_fisher;
  } else {
    s.center = to_phi_theta(mle.alpha_hat, mle.theta_hat, n);
    s.fisher = fisher_phi_theta(mle.observed_fisher, mle.alpha_hat, mle.theta_hat, n);
  }
  s.nodes.reserve(grid.first.count * grid.second.count);
  for (std::size_t i = 0; i < grid.first.count; ++i) {
    for (std::size_t j = 0; j < grid.second.count; ++j) {
      SurfaceNode node;
      node.first = grid.first.at(i);
      node.second = grid.second.at(j);
      auto at = grid.param == Parametrization::AlphaTheta ? std::array<double, 2>{node.first, node.second}
                                                          : to_alpha_theta(node.first, node.second, n);
      if (!HyperParams::is_valid(at[0], at[1]))
        throw DomainError("surface node (" + std::to_string(node.first) + ", " + std::to_string(node.second) +
                          ") outside the valid region");
      node.rel_loglik = log_eppf(p, HyperParams(at[0], at[1])) - mle.loglik_at_max;
      const double d0 = node.first - s.center[0], d1 = node.second - s.center[1];
      node.gaussian_rel_loglik =
          -0.5 * (s.fisher[0][0] * d0 * d0 + 2.0 * s.fisher[0][1] * d0 * d1 + s.fisher[1][1] * d1 * d1);
      s.nodes.push_back(node);
    }
  }
  return s;
}

double gaussian_contour_level(double coverage) {
  if (!(coverage > 0.0 && coverage < 1.0)) throw DomainError("coverage must lie in (0, 1)");
  return std::log1p(-coverage);
}

}  // namespace raretype
