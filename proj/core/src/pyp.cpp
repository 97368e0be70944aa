// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/pyp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace raretype {

HyperParams::HyperParams(double alpha, double theta) : alpha_(alpha), theta_(theta) {
  if (!is_valid(alpha, theta))
    throw DomainError("invalid hyperparameters: need 0 <= alpha < 1 and theta > -alpha (alpha=" +
                      std::to_string(alpha) + ", theta=" + std::to_string(theta) + ")");
}

bool HyperParams::is_valid(double alpha, double theta) noexcept {
  return std::isfinite(alpha) && std::isfinite(theta) && alpha >= 0.0 && alpha < 1.0 &&
         theta > -alpha;
}

double log_rising_factorial(double x, std::size_t count, double step) {
  if (count == 0) return 0.0;
  const double last = x + static_cast<double>(count - 1) * step;
  if (!(x > 0.0) || !(last > 0.0))
    throw DomainError("rising factorial with a nonpositive factor (x=" + std::to_string(x) +
                      ", count=" + std::to_string(count) + ", step=" + std::to_string(step) + ")");
  if (step == 0.0) return static_cast<double>(count) * std::log(x);
  // lgamma differences cancel badly when x/step is huge; sum directly there and for
  // short products.
  if (count <= 32 || step < 0.0 || x / step > 1e7) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += std::log(x + static_cast<double>(i) * step);
    return s;
  }
  const double z = x / step;
  return static_cast<double>(count) * std::log(step) + std::lgamma(z + static_cast<double>(count)) -
         std::lgamma(z);
}

double log_eppf(const IntegerPartition& p, const HyperParams& h) {
  const double alpha = h.alpha();
  const double theta = h.theta();
  const std::size_t k = p.num_blocks();
  double value = log_rising_factorial(theta + alpha, k - 1, alpha) -
                 log_rising_factorial(theta + 1.0, p.n() - 1, 1.0);
  const auto& a = p.sizes();
  const auto& r = p.multiplicities();
  for (std::size_t j = 0; j < a.size(); ++j)
    value += static_cast<double>(r[j]) * log_rising_factorial(1.0 - alpha, a[j] - 1, 1.0);
  return value;
}

double log_eppf(const SetPartition& p, const HyperParams& h) {
  return log_eppf(to_integer_partition(p), h);
}

ChineseRestaurant::ChineseRestaurant(const HyperParams& h, Seed seed) : h_(h), rng_(make_rng(seed)) {
  if (!(h.alpha() > 0.0)) throw DomainError("samplers require alpha > 0");
}

std::size_t ChineseRestaurant::seat() {
  const std::size_t n = seating_.size();
  const double alpha = h_.alpha();
  std::size_t table = table_sizes_.size();
  if (n > 0) {
    const double p_new =
        (h_.theta() + static_cast<double>(table_sizes_.size()) * alpha) / (static_cast<double>(n) + h_.theta());
    if (uniform01(rng_) >= p_new) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (;;) {
        const std::uint32_t t = seating_[pick(rng_)];
        const double size = table_sizes_[t];
        if (uniform01(rng_) * size < size - alpha) {
          table = t;
          break;
        }
      }
    }
  }
  if (table == table_sizes_.size()) {
    table_sizes_.push_back(0);
  } else {
    --size_counts_[table_sizes_[table]];
  }
  const std::uint32_t size = ++table_sizes_[table];
  if (size_counts_.size() <= size) size_counts_.resize(std::max<std::size_t>(size + 1, 2 * size_counts_.size()), 0);
  ++size_counts_[size];
  seating_.push_back(static_cast<std::uint32_t>(table));
  return table;
}

void ChineseRestaurant::seat(std::size_t customers) {
  seating_.reserve(seating_.size() + customers);
  for (std::size_t i = 0; i < customers; ++i) seat();
}

std::vector<double> ChineseRestaurant::next_probabilities() const {
  const double n = static_cast<double>(seating_.size());
  if (seating_.empty()) return {1.0};
  std::vector<double> probs;
  probs.reserve(table_sizes_.size() + 1);
  for (std::uint32_t s : table_sizes_) probs.push_back((s - h_.alpha()) / (n + h_.theta()));
  probs.push_back((h_.theta() + static_cast<double>(table_sizes_.size()) * h_.alpha()) / (n + h_.theta()));
  return probs;
}

SetPartition ChineseRestaurant::partition() const {
  std::vector<SetPartition::Block> blocks(table_sizes_.size());
  for (std::size_t t = 0; t < blocks.size(); ++t) blocks[t].reserve(table_sizes_[t]);
  for (std::size_t i = 0; i < seating_.size(); ++i) blocks[seating_[i]].push_back(i + 1);
  return SetPartition::from_canonical_blocks(seating_.size(), std::move(blocks));
}

SetPartition crp_sample(std::size_t n, const HyperParams& h, Seed seed) {
  if (n == 0) throw DomainError("crp_sample needs n >= 1");
  ChineseRestaurant crp(h, seed);
  crp.seat(n);
  return crp.partition();
}

std::vector<std::uint32_t> crp_table_sizes(std::size_t n, const HyperParams& h, Seed seed) {
  if (n == 0) throw DomainError("crp_table_sizes needs n >= 1");
  ChineseRestaurant crp(h, seed);
  crp.seat(n);
  return crp.table_sizes();
}

std::vector<double> WeightVector::ranked() const {
  auto sorted = weights;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return sorted;
}

WeightVector stick_breaking_sample(const HyperParams& h, std::size_t truncation, Seed seed) {
  if (truncation == 0) throw DomainError("truncation must be at least 1");
  if (!(h.alpha() > 0.0)) throw DomainError("samplers require alpha > 0");
  Rng rng = make_rng(seed);
  const double a = 1.0 - h.alpha();
  std::gamma_distribution<double> gamma_a(a, 1.0);
  std::gamma_distribution<double> gamma_b;
  WeightVector out;
  out.weights.reserve(truncation);
  double stick = 1.0;
  for (std::size_t i = 1; i <= truncation; ++i) {
    const double b = h.theta() + static_cast<double>(i) * h.alpha();
    const double x = gamma_a(rng);
    const double y = gamma_b(rng, std::gamma_distribution<double>::param_type(b, 1.0));
    const double v = (x + y > 0.0) ? x / (x + y) : a / (a + b);
    out.weights.push_back(stick * v);
    stick *= 1.0 - v;
  }
  out.residual = stick;
  return out;
}

double tail_power_law_fit(std::span<const double> weights, std::size_t first_rank, std::size_t last_rank) {
  if (first_rank < 1 || last_rank > weights.size() || first_rank >= last_rank)
    throw DomainError("degenerate fit range [" + std::to_string(first_rank) + ", " +
                      std::to_string(last_rank) + "] for " + std::to_string(weights.size()) + " weights");
  const std::size_t m = last_rank - first_rank + 1;
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = weights[first_rank - 1 + i];
    if (!(w > 0.0)) throw DomainError("nonpositive weight at rank " + std::to_string(first_rank + i));
    xs[i] = std::log(static_cast<double>(first_rank + i));
    ys[i] = std::log(w);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(m), my = sy / static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

std::vector<GrowthPoint> block_growth_diagnostics(const HyperParams& h, std::size_t n, Seed seed,
                                                  std::size_t points_per_decade) {
  if (n == 0) throw DomainError("diagnostics need n >= 1");
  if (points_per_decade == 0) points_per_decade = 1;
  std::vector<std::size_t> checkpoints;
  for (std::size_t k = 0;; ++k) {
    const double c = std::round(std::pow(10.0, static_cast<double>(k) / static_cast<double>(points_per_decade)));
    if (c >= static_cast<double>(n)) break;
    const auto ci = static_cast<std::size_t>(c);
    if (checkpoints.empty() || checkpoints.back() != ci) checkpoints.push_back(ci);
  }
  checkpoints.push_back(n);

  ChineseRestaurant crp(h, seed);
  std::vector<GrowthPoint> out;
  out.reserve(checkpoints.size());
  for (std::size_t target : checkpoints) {
    crp.seat(target - crp.customers());
    GrowthPoint pt;
    pt.n = target;
    pt.tables = crp.tables();
    pt.tables_scaled = static_cast<double>(pt.tables) / std::pow(static_cast<double>(target), h.alpha());
    pt.singleton_fraction = static_cast<double>(crp.tables_of_size(1)) / static_cast<double>(pt.tables);
    out.push_back(pt);
  }
  return out;
}

}  // namespace raretype
