// Apache License, Version 2.0, refer to LICENSE.txt

#include "simplex.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace raretype::detail {

namespace {

constexpr double kHuge = 1e300;

struct Objective {
  const std::function<double(const Point2&)>* f;
};

double call_objective(const gsl_vector* x, void* params) {
  const auto* obj = static_cast<const Objective*>(params);
  const double v = (*obj->f)(Point2{gsl_vector_get(x, 0), gsl_vector_get(x, 1)});
  return std::isfinite(v) ? v : kHuge;
}

void silence_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const HermiteRule& hermite_rule(std::size_t m) {
  static std::mutex mu;
  static std::map<std::size_t, HermiteRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  silence_gsl();
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, m, 0.0, 1.0, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!ws) throw std::runtime_error("Gauss-Hermite rule allocation failed");
  const double* x = gsl_integration_fixed_nodes(ws.get());
  const double* w = gsl_integration_fixed_weights(ws.get());
  HermiteRule rule{{x, x + m}, {w, w + m}};
  return cache.emplace(m, std::move(rule)).first->second;
}

}  // namespace

SimplexResult minimize_simplex(const std::function<double(const Point2&)>& f, const Point2& start,
                               const Point2& step, double size_tolerance, std::size_t max_iterations) {
  silence_gsl();
  Objective obj{&f};
  gsl_multimin_function fn{&call_objective, 2, &obj};

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(2), &gsl_vector_free);
  gsl_vector_set(x.get(), 0, start[0]);
  gsl_vector_set(x.get(), 1, start[1]);
  gsl_vector_set(ss.get(), 0, step[0]);
  gsl_vector_set(ss.get(), 1, step[1]);

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2), &gsl_multimin_fminimizer_free);
  SimplexResult out;
  if (gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get()) != GSL_SUCCESS) {
    out.x = start;
    out.value = call_objective(x.get(), &obj);
    return out;
  }
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) {
      // A stalled simplex that has already collapsed is at a minimum up to roundoff.
      out.converged = gsl_multimin_fminimizer_size(s.get()) < std::sqrt(size_tolerance);
      break;
    }
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tolerance) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  out.x = Point2{gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1)};
  out.value = s->fval;
  return out;
}

std::vector<double> hermite_nodes(std::size_t m) { return hermite_rule(m).nodes; }
std::vector<double> hermite_weights(std::size_t m) { return hermite_rule(m).weights; }

}  // namespace raretype::detail
