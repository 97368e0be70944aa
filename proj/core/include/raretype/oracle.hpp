// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "raretype/partition.hpp"
#include "raretype/random.hpp"

namespace raretype {

// Known population frequencies, normalized and sorted non-increasing.
class PopulationFreqs {
 public:
  // Any positive weights (frequencies or counts).
  explicit PopulationFreqs(std::vector<double> weights);

  // One value per line; blank lines and lines starting with '#' are skipped.
  static PopulationFreqs load(const std::filesystem::path& path);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  const std::vector<double>& values() const noexcept { return p_; }
  double max() const noexcept { return p_.front(); }

 private:
  std::vector<double> p_;
};

// chi[i] = j > 0 if the i-th most frequent type is one of the r_j types seen a_j times,
// 0 if unseen. Classes j are 1-based positions in IntegerPartition::sizes().
class ChiAssignment {
 public:
  explicit ChiAssignment(std::vector<std::uint32_t> chi) : chi_(std::move(chi)) {}

  // Class J to the r_J most frequent types, then J-1, ..., then 1; zeros after.
  static ChiAssignment initial(std::size_t m, const IntegerPartition& part);

  std::size_t size() const noexcept { return chi_.size(); }
  std::uint32_t operator[](std::size_t i) const noexcept { return chi_[i]; }
  const std::vector<std::uint32_t>& values() const noexcept { return chi_; }

  // #{i : chi_i = j} == r_j for every class j.
  bool satisfies(const IntegerPartition& part) const noexcept;

  friend bool operator==(const ChiAssignment&, const ChiAssignment&) = default;

 private:
  std::vector<std::uint32_t> chi_;
};

struct MhConfig {
  std::size_t iterations = 1'000'000;
  std::size_t burn_in = 100'000;
  std::size_t thinning = 10;
  Seed seed{};
  std::size_t chains = 1;
  std::size_t batches = 50;

  // 10% burn-in, thinning 10.
  static MhConfig with_defaults(std::size_t iterations, Seed seed);

  // Throws DomainError unless burn_in < iterations, thinning >= 1, chains >= 1.
  void validate() const;
};

// sum_{i: chi_i > 0} a_{chi_i} log p_i, the log target up to a constant.
// Throws DomainError if chi does not satisfy the class counts of part.
double chi_log_weight(const ChiAssignment& chi, const PopulationFreqs& p, const IntegerPartition& part);

// Metropolis acceptance probability of swapping the values at positions i and j.
double swap_acceptance_probability(const ChiAssignment& chi, const PopulationFreqs& p,
                                   const IntegerPartition& part, std::size_t i, std::size_t j);

// Random-swap Metropolis chain over assignments satisfying the class counts. Proposals are
// uniform over unordered pairs of positions holding different values.
class ChiChain {
 public:
  ChiChain(const PopulationFreqs& p, const IntegerPartition& part, ChiAssignment start);

  // One proposal; returns whether it was accepted.
  bool step(Rng& rng);

  ChiAssignment state() const { return ChiAssignment(chi_); }
  // Sum of p_i over types assigned to the size-1 class.
  double singleton_mass() const noexcept { return singleton_mass_; }
  double log_weight() const noexcept { return log_weight_; }
  bool can_move() const noexcept;

 private:
  void swap_positions(std::size_t a, std::size_t b);

  const PopulationFreqs* p_;
  std::vector<double> log_p_;
  std::vector<double> class_size_;  // index j -> a_j, with a_0 = 0
  std::uint32_t singleton_class_ = 0;  // 0 when no class has size 1
  std::vector<std::uint32_t> chi_;
  std::vector<std::vector<std::size_t>> positions_;  // positions holding each value
  std::vector<std::size_t> slot_;                    // index of i within positions_[chi_i]
  double singleton_mass_ = 0.0;
  double log_weight_ = 0.0;
};

ChiAssignment mh_step(const ChiAssignment& chi, const PopulationFreqs& p, const IntegerPartition& part, Rng& rng);

struct MassEstimate {
  double estimate = 0.0;
  double mc_std_error = 0.0;
  std::size_t samples = 0;
  double acceptance_rate = 0.0;
};

// E(sum of p over singleton types | part, p). Batch-means standard error; independent
// chains are combined by inverse-variance weighting in chain order.
// Throws DomainError("no singleton class") if part has no block of size 1.
MassEstimate estimate_singleton_mass(const PopulationFreqs& p, const IntegerPartition& part,
                                     const MhConfig& cfg, std::size_t threads = 1);

// Largest number of assignments enumerate_chi_expectation will visit.
inline constexpr double kMaxEnumeratedAssignments = 1e7;

// Number of assignments satisfying the class counts, M! / ((M-K)! prod_j r_j!).
double chi_assignment_count(std::size_t m, const IntegerPartition& part);

// Exact expectation by visiting every valid assignment. Throws DomainError when the
// count exceeds kMaxEnumeratedAssignments.
double enumerate_chi_expectation(const PopulationFreqs& p, const IntegerPartition& part);

struct TrueLr {
  double lr = 0.0;
  double mc_std_error = 0.0;
  std::size_t singletons = 0;
  MassEstimate mass;
};

// N1 / E(singleton mass | part_plus, p) for a partition of n+1 whose suspect is a singleton.
TrueLr true_lr(const PopulationFreqs& p, const IntegerPartition& part_plus, const MhConfig& cfg,
               std::size_t threads = 1);
double true_lr_exact(const PopulationFreqs& p, const IntegerPartition& part_plus);

}  // namespace raretype
