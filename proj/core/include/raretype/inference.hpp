// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include "raretype/partition.hpp"
#include "raretype/prior.hpp"
#include "raretype/pyp.hpp"

namespace raretype {

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct MleOptions {
  std::size_t restarts = 5;
  double size_tolerance = 1e-10;
  std::size_t max_iterations = 5000;
  // alpha within this distance of 0 or 1 counts as a boundary optimum.
  double boundary_tolerance = 1e-4;
};

struct MleResult {
  double alpha_hat = 0.0;
  double theta_hat = 0.0;
  double loglik_at_max = 0.0;
  // Negated Hessian of the log-likelihood in (alpha, theta), symmetric.
  Matrix2 observed_fisher{};
  bool converged = false;
  bool boundary = false;
  // All singletons or a single block: the likelihood has no interior maximum.
  bool degenerate = false;
  std::size_t n_restarts_used = 0;
  std::string note;

  bool interior() const noexcept { return converged && !boundary; }
  HyperParams params() const { return HyperParams(alpha_hat, theta_hat); }
};

// Maximizes log_eppf over 0 < alpha < 1, theta > -alpha. The search runs in
// (logit alpha, log(theta + alpha)) from `restarts` spread starting points.
// Throws DomainError for n < 2.
MleResult mle_fit(const IntegerPartition& p, const MleOptions& options = {});
MleResult mle_fit(const SetPartition& p, const MleOptions& options = {});

// Central-difference observed information of log_eppf at h, steps 1e-4 times the
// parameter scale.
Matrix2 observed_fisher(const IntegerPartition& p, const HyperParams& h);

// n (1 - alpha) / (n + 1 + theta)
double phi(const HyperParams& h, std::size_t n);

// (n + 1 + theta) / (1 - alpha): the LR when (alpha, theta) is known.
double lr_closed_form(std::size_t n, const HyperParams& h);

struct QuadratureOptions {
  double tolerance = 1e-6;
  std::size_t min_nodes = 8;
  std::size_t max_nodes = 512;
};

struct PosteriorMean {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
  std::size_t nodes_per_axis = 0;
};

// E(Phi | partition of n+1) under the hyperprior. Product priors are integrated with
// tensor Gauss-Hermite rules in the prior's unconstrained coordinates (logit of the alpha
// range, log or logit of the theta support), centred at the posterior mode and scaled by
// the local curvature. Node count doubles until the mean and the integrand mass change
// by less than the tolerance; error_estimate is the last change in the mean.
PosteriorMean posterior_mean_phi(const IntegerPartition& p_plus, const Hyperprior& prior,
                                 const QuadratureOptions& options = {});
// Requires the last element to be a singleton (the suspect's new type).
PosteriorMean posterior_mean_phi(const SetPartition& p_plus, const Hyperprior& prior,
                                 const QuadratureOptions& options = {});

struct LrReport {
  double lr_bayes = 0.0;
  // NaN when no interior MLE exists for a non-degenerate prior.
  double lr_plugin = 0.0;
  double posterior_mean_phi = 0.0;
  double quadrature_error_estimate = 0.0;
  bool quadrature_converged = true;
  std::size_t n = 0;
  std::optional<MleResult> mle;
};

struct LrOptions {
  QuadratureOptions quadrature;
  MleOptions mle;
};

// lr_bayes = n / E(Phi | p_plus). For a point mass both LR fields equal the closed form
// at the point; otherwise lr_plugin uses the MLE fitted to p_plus.
LrReport lr_bayes(const IntegerPartition& p_plus, const Hyperprior& prior, const LrOptions& options = {});
LrReport lr_bayes(const SetPartition& p_plus, const Hyperprior& prior, const LrOptions& options = {});

// Closed form at the MLE. Throws DomainError for a non-converged or boundary MLE.
double lr_plugin(std::size_t n, const MleResult& m);

}  // namespace raretype
