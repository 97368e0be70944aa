// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <limits>
#include <vector>

#include "simplex.hpp"

namespace raretype {

namespace {

using detail::Point2;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logistic(double u) noexcept {
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

double log_logistic(double u) noexcept {
  return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

double logit(double x) noexcept { return std::log(x) - std::log1p(-x); }

double loglik_or_neg_inf(const IntegerPartition& p, double alpha, double theta) {
  if (!HyperParams::is_valid(alpha, theta)) return kNegInf;
  return log_eppf(p, HyperParams(alpha, theta));
}

// Spread starting points for the likelihood search, as (alpha, theta).
constexpr std::array<Point2, 8> kStarts{{{0.5, 10.0},
                                         {0.25, 1.0},
                                         {0.75, 100.0},
                                         {0.1, 1000.0},
                                         {0.9, 0.5},
                                         {0.5, 10000.0},
                                         {0.3, 0.1},
                                         {0.6, 300.0}}};

MleResult fit_likelihood(const IntegerPartition& p, const MleOptions& options) {
  if (p.n() < 2) throw DomainError("mle_fit needs n >= 2");
  auto objective = [&p](const Point2& x) {
    const double alpha = logistic(x[0]);
    const double theta = std::exp(x[1]) - alpha;
    return -loglik_or_neg_inf(p, alpha, theta);
  };

  MleResult out;
  const std::size_t starts = std::max<std::size_t>(options.restarts, 1);
  detail::SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < starts; ++s) {
    Point2 start = kStarts[s % kStarts.size()];
    if (s >= kStarts.size()) start[1] *= std::pow(10.0, static_cast<double>(s / kStarts.size()));
    const Point2 x0{logit(start[0]), std::log(start[1] + start[0])};
    auto run = detail::minimize_simplex(objective, x0, {0.5, 1.0}, options.size_tolerance, options.max_iterations);
    if (run.value < best.value) best = run;
  }
  out.n_restarts_used = starts;
  auto polish = detail::minimize_simplex(objective, best.x, {0.05, 0.1}, options.size_tolerance,
                                         options.max_iterations);
  out.converged = polish.converged || best.converged;
  if (polish.value <= best.value) {
    best.x = polish.x;
    best.value = polish.value;
  }
  out.alpha_hat = logistic(best.x[0]);
  out.theta_hat = std::exp(best.x[1]) - out.alpha_hat;
  out.loglik_at_max = -best.value;

  const std::size_t k = p.num_blocks();
  if (k == p.n() || k == 1) {
    out.degenerate = true;
    out.boundary = true;
    out.note = k == 1 ? "single block: likelihood maximized at the alpha = 0 boundary"
                      : "all singletons: likelihood increasing in alpha";
  } else if (out.alpha_hat < options.boundary_tolerance || out.alpha_hat > 1.0 - options.boundary_tolerance) {
    out.boundary = true;
    out.note = "alpha estimate on the boundary";
  } else if (best.x[1] > 25.0 || out.theta_hat + out.alpha_hat < options.boundary_tolerance) {
    out.boundary = true;
    out.note = "theta estimate on the boundary";
  }
  if (!out.converged && out.note.empty()) out.note = "simplex search did not converge";

  if (!out.boundary) out.observed_fisher = observed_fisher(p, out.params());
  return out;
}

// Unconstrained coordinates for a product prior's support.
class SupportMap {
 public:
  explicit SupportMap(const Hyperprior& prior)
      : alpha_lo_(prior.alpha_range().first),
        alpha_hi_(prior.alpha_range().second),
        theta_lo_(prior.theta_density().lower()),
        theta_hi_(prior.theta_density().upper()),
        bounded_(prior.theta_density().bounded()) {}

  Point2 to_params(const Point2& z) const noexcept {
    const double alpha = alpha_lo_ + (alpha_hi_ - alpha_lo_) * logistic(z[0]);
    const double theta =
        bounded_ ? theta_lo_ + (theta_hi_ - theta_lo_) * logistic(z[1]) : theta_lo_ + std::exp(z[1]);
    return {alpha, theta};
  }

  std::optional<Point2> from_params(double alpha, double theta) const noexcept {
    if (!(alpha > alpha_lo_ && alpha < alpha_hi_ && theta > theta_lo_ && theta < theta_hi_)) return std::nullopt;
    const double u = logit((alpha - alpha_lo_) / (alpha_hi_ - alpha_lo_));
    const double v = bounded_ ? logit((theta - theta_lo_) / (theta_hi_ - theta_lo_)) : std::log(theta - theta_lo_);
    return Point2{u, v};
  }

  double log_jacobian(const Point2& z) const noexcept {
    double lj = std::log(alpha_hi_ - alpha_lo_) + log_logistic(z[0]) + log_logistic(-z[0]);
    lj += bounded_ ? std::log(theta_hi_ - theta_lo_) + log_logistic(z[1]) + log_logistic(-z[1]) : z[1];
    return lj;
  }

  // Centre of the theta coordinate for starting points.
  double theta_origin(const ThetaDensity& d) const noexcept {
    if (bounded_) return 0.0;
    const double mean = d.family() == ThetaDensity::Family::Exponential ? 1.0 / d.first() : d.first() / d.second();
    return std::log(std::max(mean, 1e-3));
  }

 private:
  double alpha_lo_, alpha_hi_, theta_lo_, theta_hi_;
  bool bounded_;
};

Matrix2 hessian(const std::function<double(const Point2&)>& f, const Point2& x, const Point2& step) {
  const double f0 = f(x);
  auto at = [&](double du, double dv) { return f(Point2{x[0] + du, x[1] + dv}); };
  const double hu = step[0], hv = step[1];
  Matrix2 h{};
  h[0][0] = (at(hu, 0) - 2.0 * f0 + at(-hu, 0)) / (hu * hu);
  h[1][1] = (at(0, hv) - 2.0 * f0 + at(0, -hv)) / (hv * hv);
  h[0][1] = h[1][0] = (at(hu, hv) - at(hu, -hv) - at(-hu, hv) + at(-hu, -hv)) / (4.0 * hu * hv);
  return h;
}

PosteriorMean integrate_phi(const IntegerPartition& p_plus, const Hyperprior& prior,
                            const QuadratureOptions& options, const std::optional<MleResult>& mle) {
  const std::size_t n = p_plus.n() - 1;
  if (n == 0) throw DomainError("partition of n+1 needs n >= 1");
  PosteriorMean out;
  if (prior.is_point_mass()) {
    out.value = phi(*prior.point(), n);
    return out;
  }

  const SupportMap map(prior);
  auto log_integrand = [&](const Point2& z) {
    const Point2 t = map.to_params(z);
    const double lp = prior.log_density(t[0], t[1]);
    if (!std::isfinite(lp)) return kNegInf;
    const double ll = loglik_or_neg_inf(p_plus, t[0], t[1]);
    if (!std::isfinite(ll)) return kNegInf;
    return ll + lp + map.log_jacobian(z);
  };
  auto neg = [&](const Point2& z) { return -log_integrand(z); };

  std::vector<Point2> starts;
  if (mle && std::isfinite(mle->alpha_hat) && std::isfinite(mle->theta_hat)) {
    if (auto z = map.from_params(mle->alpha_hat, mle->theta_hat)) starts.push_back(*z);
  }
  const double v0 = map.theta_origin(prior.theta_density());
  starts.push_back({0.0, v0});
  starts.push_back({1.0, v0 + 2.0});
  starts.push_back({-1.0, v0 - 2.0});

  detail::SimplexResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    auto run = detail::minimize_simplex(neg, s, {0.5, 1.0}, 1e-9, 5000);
    if (run.value < best.value) best = run;
  }
  auto polish = detail::minimize_simplex(neg, best.x, {0.05, 0.1}, 1e-10, 5000);
  if (polish.value <= best.value) best = polish;
  if (!std::isfinite(best.value) || best.value >= 1e299)
    throw DomainError("posterior has no mass inside the prior support");
  const Point2 mode = best.x;
  const double h_mode = -best.value;

  // Curvature at the mode. A second pass rescales the steps to the local width.
  Point2 step{1e-3, 1e-3};
  Matrix2 hmat = hessian(log_integrand, mode, step);
  for (int i = 0; i < 2; ++i) {
    const double curv = -hmat[i][i];
    if (curv > 0.0 && std::isfinite(curv)) step[i] = std::clamp(0.05 / std::sqrt(curv), 1e-6, 0.5);
  }
  hmat = hessian(log_integrand, mode, step);

  Matrix2 chol{};  // lower Cholesky factor of the inverse information
  const double a = -hmat[0][0], b = -hmat[0][1], c = -hmat[1][1];
  const double det = a * c - b * b;
  if (a > 0.0 && det > 0.0 && std::isfinite(det)) {
    const double s11 = c / det, s12 = -b / det, s22 = a / det;
    chol[0][0] = std::sqrt(s11);
    chol[1][0] = s12 / chol[0][0];
    chol[1][1] = std::sqrt(std::max(s22 - chol[1][0] * chol[1][0], 0.0));
  } else {
    chol[0][0] = (a > 0.0 && std::isfinite(a)) ? 1.0 / std::sqrt(a) : 1.0;
    chol[1][1] = (c > 0.0 && std::isfinite(c)) ? 1.0 / std::sqrt(c) : 1.0;
  }

  double prev_mean = 0.0, prev_log_mass = 0.0;
  bool have_prev = false;
  out.converged = false;
  for (std::size_t m = std::max<std::size_t>(options.min_nodes, 2); m <= options.max_nodes; m *= 2) {
    const auto x = detail::hermite_nodes(m);
    const auto w = detail::hermite_weights(m);
    std::vector<double> log_terms;
    std::vector<double> phis;
    log_terms.reserve(m * m);
    phis.reserve(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double zi = std::sqrt(2.0) * x[i], zj = std::sqrt(2.0) * x[j];
        const Point2 z{mode[0] + chol[0][0] * zi, mode[1] + chol[1][0] * zi + chol[1][1] * zj};
        const double lh = log_integrand(z);
        if (!std::isfinite(lh)) continue;
        const Point2 t = map.to_params(z);
        log_terms.push_back(std::log(w[i]) + std::log(w[j]) + x[i] * x[i] + x[j] * x[j] + lh - h_mode);
        phis.push_back(n * (1.0 - t[0]) / (static_cast<double>(n) + 1.0 + t[1]));
      }
    }
    if (log_terms.empty()) throw DomainError("no quadrature node inside the prior support");
    const double tmax = *std::max_element(log_terms.begin(), log_terms.end());
    double mass = 0.0, num = 0.0;
    for (std::size_t k = 0; k < log_terms.size(); ++k) {
      const double e = std::exp(log_terms[k] - tmax);
      mass += e;
      num += e * phis[k];
    }
    const double mean = num / mass;
    const double log_mass = std::log(mass) + tmax;
    out.value = mean;
    out.nodes_per_axis = m;
    if (have_prev) {
      out.error_estimate = std::abs(mean - prev_mean);
      const double mass_change = std::abs(std::expm1(log_mass - prev_log_mass));
      if (out.error_estimate <= options.tolerance * std::abs(mean) && mass_change <= options.tolerance) {
        out.converged = true;
        break;
      }
    }
    prev_mean = mean;
    prev_log_mass = log_mass;
    have_prev = true;
  }
  return out;
}

LrReport make_report(const IntegerPartition& p_plus, const Hyperprior& prior, const LrOptions& options) {
  if (p_plus.n() < 2) throw DomainError("LR needs a database of at least one profile");
  LrReport r;
  r.n = p_plus.n() - 1;
  if (prior.is_point_mass()) {
    r.posterior_mean_phi = phi(*prior.point(), r.n);
    r.lr_plugin = lr_closed_form(r.n, *prior.point());
    r.lr_bayes = r.lr_plugin;
    return r;
  }
  r.mle = fit_likelihood(p_plus, options.mle);
  const auto pm = integrate_phi(p_plus, prior, options.quadrature, r.mle);
  r.posterior_mean_phi = pm.value;
  r.quadrature_error_estimate = pm.error_estimate;
  r.quadrature_converged = pm.converged;
  r.lr_bayes = static_cast<double>(r.n) / pm.value;
  r.lr_plugin = r.mle->interior() ? lr_plugin(r.n, *r.mle) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

void require_rare_type(const SetPartition& p_plus) {
  if (!p_plus.last_is_singleton()) throw DomainError("not a rare-type configuration");
}

}  // namespace

MleResult mle_fit(const IntegerPartition& p, const MleOptions& options) { return fit_likelihood(p, options); }

MleResult mle_fit(const SetPartition& p, const MleOptions& options) {
  return fit_likelihood(to_integer_partition(p), options);
}

Matrix2 observed_fisher(const IntegerPartition& p, const HyperParams& h) {
  const double alpha = h.alpha(), theta = h.theta();
  const double ha = 1e-4 * std::min(alpha, 1.0 - alpha);
  const double ht = std::min(1e-4 * std::max(std::abs(theta), 1.0), 0.5 * (theta + alpha - ha));
  if (!(ha > 0.0 && ht > 0.0)) throw DomainError("observed information needs an interior point");
  auto l = [&](double da, double dt) { return log_eppf(p, HyperParams(alpha + da, theta + dt)); };
  const double l0 = l(0, 0);
  Matrix2 f{};
  f[0][0] = -(l(ha, 0) - 2.0 * l0 + l(-ha, 0)) / (ha * ha);
  f[1][1] = -(l(0, ht) - 2.0 * l0 + l(0, -ht)) / (ht * ht);
  f[0][1] = f[1][0] = -(l(ha, ht) - l(ha, -ht) - l(-ha, ht) + l(-ha, -ht)) / (4.0 * ha * ht);
  return f;
}

double phi(const HyperParams& h, std::size_t n) {
  const double nn = static_cast<double>(n);
  return nn * (1.0 - h.alpha()) / (nn + 1.0 + h.theta());
}

double lr_closed_form(std::size_t n, const HyperParams& h) {
  return (static_cast<double>(n) + 1.0 + h.theta()) / (1.0 - h.alpha());
}

PosteriorMean posterior_mean_phi(const IntegerPartition& p_plus, const Hyperprior& prior,
                                 const QuadratureOptions& options) {
  std::optional<MleResult> mle;
  if (!prior.is_point_mass() && p_plus.n() >= 2) mle = fit_likelihood(p_plus, {});
  return integrate_phi(p_plus, prior, options, mle);
}

PosteriorMean posterior_mean_phi(const SetPartition& p_plus, const Hyperprior& prior,
                                 const QuadratureOptions& options) {
  require_rare_type(p_plus);
  return posterior_mean_phi(to_integer_partition(p_plus), prior, options);
}

LrReport lr_bayes(const IntegerPartition& p_plus, const Hyperprior& prior, const LrOptions& options) {
  if (p_plus.multiplicity_of(1) == 0) throw DomainError("not a rare-type configuration");
  return make_report(p_plus, prior, options);
}

LrReport lr_bayes(const SetPartition& p_plus, const Hyperprior& prior, const LrOptions& options) {
  require_rare_type(p_plus);
  return make_report(to_integer_partition(p_plus), prior, options);
}

double lr_plugin(std::size_t n, const MleResult& m) {
  if (!m.converged) throw DomainError("plug-in LR needs a converged MLE");
  if (m.boundary) throw DomainError("plug-in LR needs an interior MLE: " + m.note);
  return lr_closed_form(n, m.params());
}

}  // namespace raretype
