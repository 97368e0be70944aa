// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "raretype/pyp.hpp"

namespace raretype {

// One-dimensional density for theta.
class ThetaDensity {
 public:
  enum class Family { Uniform, Exponential, Gamma };

  static ThetaDensity uniform(double lo, double hi);
  static ThetaDensity exponential(double rate);
  static ThetaDensity gamma(double shape, double rate);

  Family family() const noexcept { return family_; }
  double first() const noexcept { return p1_; }
  double second() const noexcept { return p2_; }

  double lower() const noexcept;
  double upper() const noexcept;  // +inf for unbounded families
  bool bounded() const noexcept { return family_ == Family::Uniform; }

  // -inf outside the support.
  double log_density(double theta) const noexcept;

  std::string to_string() const;

  friend bool operator==(const ThetaDensity&, const ThetaDensity&) = default;

 private:
  ThetaDensity(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}
  Family family_;
  double p1_;
  double p2_;
};

enum class PriorKind { ProductUniform, ProductIndependent, PointMass };

// Hyperprior over (alpha, theta). Product priors are alpha ~ Uniform(lo, hi) times an
// independent theta density; the support must lie inside the valid region.
class Hyperprior {
 public:
  static Hyperprior point_mass(const HyperParams& point);
  static Hyperprior product(double alpha_lo, double alpha_hi, const ThetaDensity& theta);

  // alpha ~ Uniform(0, 1), theta ~ Exponential(rate 1/500).
  static Hyperprior diffuse();

  // Accepted forms:
  //   default
  //   point-mass:alpha=0.5,theta=216
  //   product:alpha=0:1,theta=exponential:0.002
  //   product:alpha=0.1:0.9,theta=uniform:0:1000
  //   product:alpha=0:1,theta=gamma:2:0.01
  // Throws DomainError on malformed text or an invalid support.
  static Hyperprior parse(std::string_view text);

  PriorKind kind() const noexcept;
  bool is_point_mass() const noexcept { return point_.has_value(); }
  const std::optional<HyperParams>& point() const noexcept { return point_; }
  std::pair<double, double> alpha_range() const noexcept { return {alpha_lo_, alpha_hi_}; }
  const ThetaDensity& theta_density() const noexcept { return theta_; }

  // Joint log density for product priors (-inf outside the support). Point masses have
  // no density; throws DomainError.
  double log_density(double alpha, double theta) const;

  std::string to_string() const;

  friend bool operator==(const Hyperprior&, const Hyperprior&) = default;

 private:
  Hyperprior(std::optional<HyperParams> point, double alpha_lo, double alpha_hi, ThetaDensity theta)
      : point_(point), alpha_lo_(alpha_lo), alpha_hi_(alpha_hi), theta_(theta) {}

  std::optional<HyperParams> point_;
  double alpha_lo_;
  double alpha_hi_;
  ThetaDensity theta_;
};

}  // namespace raretype
