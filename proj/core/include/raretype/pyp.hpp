// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "raretype/partition.hpp"
#include "raretype/random.hpp"

namespace raretype {

// Discount alpha and concentration theta of the two-parameter Poisson-Dirichlet law.
// Valid region: 0 <= alpha < 1, theta > -alpha.
class HyperParams {
 public:
  HyperParams(double alpha, double theta);

  static bool is_valid(double alpha, double theta) noexcept;

  double alpha() const noexcept { return alpha_; }
  double theta() const noexcept { return theta_; }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;

 private:
  double alpha_;
  double theta_;
};

// log prod_{i=0}^{count-1} (x + i*step). Empty product for count == 0.
// Throws DomainError if any factor is nonpositive.
double log_rising_factorial(double x, std::size_t count, double step);

// Log of the Pitman sampling formula
//   [theta+alpha]_{k-1;alpha} / [theta+1]_{n-1;1} * prod_i [1-alpha]_{n_i-1;1}
// which at alpha = 0 is the Ewens sampling formula.
double log_eppf(const IntegerPartition& p, const HyperParams& h);
double log_eppf(const SetPartition& p, const HyperParams& h);

// Sequential seating with
//   P(new table)      = (theta + k*alpha) / (n + theta)
//   P(table i)        = (n_i - alpha)     / (n + theta).
// Existing tables are chosen by picking a uniformly random seated customer and
// accepting with probability (n_i - alpha)/n_i, which is O(1) expected per customer.
class ChineseRestaurant {
 public:
  // Requires alpha > 0.
  ChineseRestaurant(const HyperParams& h, Seed seed);

  // Seats one customer; returns the 0-based table index.
  std::size_t seat();
  void seat(std::size_t customers);

  std::size_t customers() const noexcept { return seating_.size(); }
  std::size_t tables() const noexcept { return table_sizes_.size(); }
  const std::vector<std::uint32_t>& table_sizes() const noexcept { return table_sizes_; }
  const std::vector<std::uint32_t>& seating() const noexcept { return seating_; }

  // m_j: number of tables with exactly j customers.
  std::size_t tables_of_size(std::size_t j) const noexcept {
    return j < size_counts_.size() ? size_counts_[j] : 0;
  }

  // Probabilities for the next customer: one entry per existing table, then the new table.
  std::vector<double> next_probabilities() const;

  SetPartition partition() const;

 private:
  HyperParams h_;
  Rng rng_;
  std::vector<std::uint32_t> seating_;
  std::vector<std::uint32_t> table_sizes_;
  std::vector<std::size_t> size_counts_;
};

SetPartition crp_sample(std::size_t n, const HyperParams& h, Seed seed);

// Table sizes in creation order, skipping materialization of the blocks.
std::vector<std::uint32_t> crp_table_sizes(std::size_t n, const HyperParams& h, Seed seed);

// First `truncation` GEM weights and the stick mass left unbroken.
struct WeightVector {
  std::vector<double> weights;
  double residual = 0.0;

  // Weights in non-increasing order (the PD ranking).
  std::vector<double> ranked() const;
};

// W_i = V_i prod_{j<i}(1 - V_j), V_i ~ Beta(1 - alpha, theta + i*alpha). Requires alpha > 0.
WeightVector stick_breaking_sample(const HyperParams& h, std::size_t truncation, Seed seed);

// Least-squares slope of log w_i against log i for 1-based ranks in
// [first_rank, last_rank]. Weights are taken in the order given.
double tail_power_law_fit(std::span<const double> weights, std::size_t first_rank,
                          std::size_t last_rank);

struct GrowthPoint {
  std::size_t n = 0;
  std::size_t tables = 0;
  double tables_scaled = 0.0;       // K_n / n^alpha
  double singleton_fraction = 0.0;  // m_1(n) / K_n
};

// One CRP run of n customers, recorded at roughly log-spaced checkpoints (always
// including n).
std::vector<GrowthPoint> block_growth_diagnostics(const HyperParams& h, std::size_t n, Seed seed,
                                                  std::size_t points_per_decade = 10);

}  // namespace raretype
