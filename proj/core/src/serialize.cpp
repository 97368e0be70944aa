// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace raretype {

namespace {

nlohmann::json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json matrix_json(const Matrix2& m) {
  return nlohmann::json::array({{number_or_null(m[0][0]), number_or_null(m[0][1])},
                                {number_or_null(m[1][0]), number_or_null(m[1][1])}});
}

}  // namespace

nlohmann::json to_json(const SetPartition& p) { return {{"n", p.n()}, {"blocks", p.blocks()}}; }

SetPartition set_partition_from_json(const nlohmann::json& j) {
  try {
    return SetPartition(j.at("n").get<std::size_t>(), j.at("blocks").get<std::vector<SetPartition::Block>>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed partition JSON: ") + e.what());
  }
}

nlohmann::json to_json(const IntegerPartition& p) { return {{"a", p.sizes()}, {"r", p.multiplicities()}}; }

IntegerPartition integer_partition_from_json(const nlohmann::json& j) {
  try {
    return IntegerPartition(j.at("a").get<std::vector<std::size_t>>(), j.at("r").get<std::vector<std::size_t>>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed integer partition JSON: ") + e.what());
  }
}

IntegerPartition parse_integer_partition(const std::string& text) {
  std::vector<std::size_t> a, r;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) throw DomainError("expected size:count in '" + item + "'");
    std::size_t size = 0, count = 0;
    auto parse = [&](std::string_view s, std::size_t& out) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc() || ptr != s.data() + s.size()) throw DomainError("malformed integer in '" + item + "'");
    };
    parse(std::string_view(item).substr(0, colon), size);
    parse(std::string_view(item).substr(colon + 1), count);
    a.push_back(size);
    r.push_back(count);
  }
  // accept any order of classes
  std::vector<std::size_t> order(a.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x] < a[y]; });
  std::vector<std::size_t> sa, sr;
  for (auto i : order) {
    sa.push_back(a[i]);
    sr.push_back(r[i]);
  }
  return IntegerPartition(std::move(sa), std::move(sr));
}

nlohmann::json to_json(const MleResult& m) {
  return {{"alpha_hat", number_or_null(m.alpha_hat)},
          {"theta_hat", number_or_null(m.theta_hat)},
          {"loglik_at_max", number_or_null(m.loglik_at_max)},
          {"observed_fisher", matrix_json(m.observed_fisher)},
          {"converged", m.converged},
          {"boundary", m.boundary},
          {"degenerate", m.degenerate},
          {"n_restarts_used", m.n_restarts_used},
          {"note", m.note}};
}

nlohmann::json to_json(const LrReport& r) {
  nlohmann::json j{{"n", r.n},
                   {"lr_bayes", number_or_null(r.lr_bayes)},
                   {"lr_plugin", number_or_null(r.lr_plugin)},
                   {"posterior_mean_phi", number_or_null(r.posterior_mean_phi)},
                   {"quadrature_error_estimate", number_or_null(r.quadrature_error_estimate)},
                   {"quadrature_converged", r.quadrature_converged}};
  if (r.mle) j["mle"] = to_json(*r.mle);
  return j;
}

nlohmann::json to_json(const WeightVector& w, bool include_weights) {
  nlohmann::json j{{"truncation", w.weights.size()}, {"residual", w.residual}};
  if (include_weights) j["weights"] = w.weights;
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace raretype
