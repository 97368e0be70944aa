// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/prior.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace raretype {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(delim, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw DomainError("malformed number '" + std::string(s) + "' in prior spec '" + std::string(context) + "'");
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ThetaDensity ThetaDensity::uniform(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw DomainError("uniform theta density needs lo < hi");
  return {Family::Uniform, lo, hi};
}

ThetaDensity ThetaDensity::exponential(double rate) {
  if (!(rate > 0.0 && std::isfinite(rate))) throw DomainError("exponential rate must be positive");
  return {Family::Exponential, rate, 0.0};
}

ThetaDensity ThetaDensity::gamma(double shape, double rate) {
  if (!(shape > 0.0 && rate > 0.0 && std::isfinite(shape) && std::isfinite(rate)))
    throw DomainError("gamma shape and rate must be positive");
  return {Family::Gamma, shape, rate};
}

double ThetaDensity::lower() const noexcept { return family_ == Family::Uniform ? p1_ : 0.0; }

double ThetaDensity::upper() const noexcept { return family_ == Family::Uniform ? p2_ : kInf; }

double ThetaDensity::log_density(double theta) const noexcept {
  switch (family_) {
    case Family::Uniform:
      return (theta > p1_ && theta < p2_) ? -std::log(p2_ - p1_) : -kInf;
    case Family::Exponential:
      return theta > 0.0 ? std::log(p1_) - p1_ * theta : -kInf;
    case Family::Gamma:
      return theta > 0.0 ? p1_ * std::log(p2_) - std::lgamma(p1_) + (p1_ - 1.0) * std::log(theta) - p2_ * theta
                         : -kInf;
  }
  return -kInf;
}

std::string ThetaDensity::to_string() const {
  switch (family_) {
    case Family::Uniform:
      return "uniform:" + fmt(p1_) + ":" + fmt(p2_);
    case Family::Exponential:
      return "exponential:" + fmt(p1_);
    case Family::Gamma:
      return "gamma:" + fmt(p1_) + ":" + fmt(p2_);
  }
  return {};
}

Hyperprior Hyperprior::point_mass(const HyperParams& point) {
  return Hyperprior(point, point.alpha(), point.alpha(), ThetaDensity::exponential(1.0));
}

Hyperprior Hyperprior::product(double alpha_lo, double alpha_hi, const ThetaDensity& theta) {
  if (!(alpha_lo >= 0.0 && alpha_hi <= 1.0 && alpha_lo < alpha_hi))
    throw DomainError("alpha range must satisfy 0 <= lo < hi <= 1");
  if (theta.upper() <= -alpha_hi) throw DomainError("prior mass lies entirely outside the valid region");
  if (theta.lower() < -alpha_lo)
    throw DomainError("theta support must satisfy theta > -alpha over the whole alpha range");
  return Hyperprior(std::nullopt, alpha_lo, alpha_hi, theta);
}

Hyperprior Hyperprior::diffuse() { return product(0.0, 1.0, ThetaDensity::exponential(1.0 / 500.0)); }

Hyperprior Hyperprior::parse(std::string_view text) {
  if (text == "default" || text == "diffuse") return diffuse();
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw DomainError("malformed prior spec '" + std::string(text) + "'");
  auto kind = text.substr(0, colon);
  auto body = text.substr(colon + 1);

  std::optional<std::string_view> alpha_text, theta_text;
  for (auto item : split(body, ',')) {
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw DomainError("malformed prior spec '" + std::string(text) + "'");
    auto key = item.substr(0, eq);
    auto value = item.substr(eq + 1);
    if (key == "alpha" && !alpha_text) {
      alpha_text = value;
    } else if (key == "theta" && !theta_text) {
      theta_text = value;
    } else {
      throw DomainError("unexpected key '" + std::string(key) + "' in prior spec '" + std::string(text) + "'");
    }
  }
  if (!alpha_text || !theta_text)
    throw DomainError("prior spec '" + std::string(text) + "' needs both alpha and theta");

  if (kind == "point-mass" || kind == "point") {
    return point_mass(HyperParams(to_double(*alpha_text, text), to_double(*theta_text, text)));
  }
  if (kind == "product" || kind == "product-uniform" || kind == "product-independent") {
    auto range = split(*alpha_text, ':');
    if (range.size() != 2) throw DomainError("alpha range must be lo:hi in '" + std::string(text) + "'");
    auto parts = split(*theta_text, ':');
    ThetaDensity theta = ThetaDensity::exponential(1.0);
    if (parts[0] == "uniform" && parts.size() == 3) {
      theta = ThetaDensity::uniform(to_double(parts[1], text), to_double(parts[2], text));
    } else if (parts[0] == "exponential" && parts.size() == 2) {
      theta = ThetaDensity::exponential(to_double(parts[1], text));
    } else if (parts[0] == "gamma" && parts.size() == 3) {
      theta = ThetaDensity::gamma(to_double(parts[1], text), to_double(parts[2], text));
    } else {
      throw DomainError("unknown theta density '" + std::string(*theta_text) + "'");
    }
    auto prior = product(to_double(range[0], text), to_double(range[1], text), theta);
    if (kind == "product-uniform" && prior.kind() != PriorKind::ProductUniform)
      throw DomainError("product-uniform prior needs a uniform theta density");
    if (kind == "product-independent" && prior.kind() != PriorKind::ProductIndependent)
      throw DomainError("product-independent prior needs a non-uniform theta density");
    return prior;
  }
  throw DomainError("unknown prior kind '" + std::string(kind) + "'");
}

PriorKind Hyperprior::kind() const noexcept {
  if (point_) return PriorKind::PointMass;
  return theta_.family() == ThetaDensity::Family::Uniform ? PriorKind::ProductUniform
                                                          : PriorKind::ProductIndependent;
}

double Hyperprior::log_density(double alpha, double theta) const {
  if (point_) throw DomainError("a point-mass prior has no density");
  if (!(alpha > alpha_lo_ && alpha < alpha_hi_)) return -kInf;
  if (!HyperParams::is_valid(alpha, theta)) return -kInf;
  return -std::log(alpha_hi_ - alpha_lo_) + theta_.log_density(theta);
}

std::string Hyperprior::to_string() const {
  if (point_) return "point-mass:alpha=" + fmt(point_->alpha()) + ",theta=" + fmt(point_->theta());
  return "product:alpha=" + fmt(alpha_lo_) + ":" + fmt(alpha_hi_) + ",theta=" + theta_.to_string();
}

}  // namespace raretype
