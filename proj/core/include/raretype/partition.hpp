// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "raretype/error.hpp"

namespace raretype {

// Partition of the ground set {1..n} into nonempty disjoint blocks.
//
// Blocks are stored canonically: each block sorted ascending, blocks ordered by their
// least element. Element indices are 1-based.
class SetPartition {
 public:
  using Block = std::vector<std::size_t>;

  // Validates and canonicalizes. Throws DomainError unless the blocks cover {1..n}
  // exactly with no empty block.
  SetPartition(std::size_t n, std::vector<Block> blocks);

  // Same contract, for blocks already in canonical order (O(n) check, no sorting).
  // Throws DomainError if the order is not canonical.
  static SetPartition from_canonical_blocks(std::size_t n, std::vector<Block> blocks);

  std::size_t n() const noexcept { return n_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const Block& block(std::size_t i) const { return blocks_.at(i); }

  std::vector<std::size_t> block_sizes() const;

  // Block holding element n as a singleton, i.e. the last element is unmatched.
  bool last_is_singleton() const noexcept;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;

 private:
  struct Canonical {};
  SetPartition(Canonical, std::size_t n, std::vector<Block> blocks);
  void validate() const;

  std::size_t n_;
  std::vector<Block> blocks_;
};

// Compact form of a partition of the integer n: distinct block sizes `a` (strictly
// increasing) with multiplicities `r`, so that n = sum_j a_j * r_j.
class IntegerPartition {
 public:
  IntegerPartition(std::vector<std::size_t> sizes, std::vector<std::size_t> multiplicities);

  static IntegerPartition from_block_sizes(std::span<const std::size_t> sizes);

  std::size_t n() const noexcept { return n_; }
  std::size_t num_blocks() const noexcept { return blocks_; }
  std::size_t num_classes() const noexcept { return a_.size(); }
  const std::vector<std::size_t>& sizes() const noexcept { return a_; }
  const std::vector<std::size_t>& multiplicities() const noexcept { return r_; }

  // Number of blocks with exactly j elements.
  std::size_t multiplicity_of(std::size_t j) const noexcept;

  friend bool operator==(const IntegerPartition&, const IntegerPartition&) = default;

 private:
  std::vector<std::size_t> a_;
  std::vector<std::size_t> r_;
  std::size_t n_ = 0;
  std::size_t blocks_ = 0;
};

// i and j share a block iff labels[i] == labels[j]. Throws DomainError("empty sample")
// on an empty sequence.
template <typename Label, typename Hash = std::hash<Label>>
SetPartition partition_from_labels(std::span<const Label> labels) {
  if (labels.empty()) throw DomainError("empty sample");
  std::unordered_map<Label, std::size_t, Hash> block_of;
  block_of.reserve(labels.size());
  std::vector<SetPartition::Block> blocks;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = block_of.try_emplace(labels[i], blocks.size());
    if (inserted) blocks.emplace_back();
    blocks[it->second].push_back(i + 1);
  }
  // First-appearance order is least-element order.
  return SetPartition::from_canonical_blocks(labels.size(), std::move(blocks));
}

template <typename Label>
SetPartition partition_from_labels(const std::vector<Label>& labels) {
  return partition_from_labels<Label>(std::span<const Label>(labels));
}

// Table (block) ids per element, with ids assigned in order of first appearance
// starting from 0. Throws DomainError if ids are not in first-appearance order.
SetPartition partition_from_table_assignment(std::span<const std::size_t> tables);

// Appends {n+1} as a new singleton block (the suspect's unseen type).
SetPartition extend_with_suspect(const SetPartition& p);

// Turns the singleton {n} into {n, n+1} (trace matching suspect). Requires the last
// element to be a singleton; otherwise throws DomainError("not a rare-type configuration").
SetPartition extend_with_trace(const SetPartition& p);

IntegerPartition to_integer_partition(const SetPartition& p);

// N1
std::size_t singleton_count(const SetPartition& p) noexcept;

// m_j(n)
std::size_t size_multiplicity(const SetPartition& p, std::size_t j) noexcept;

}  // namespace raretype
