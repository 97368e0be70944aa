// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/partition.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace raretype {

SetPartition::SetPartition(std::size_t n, std::vector<Block> blocks) : n_(n), blocks_(std::move(blocks)) {
  for (auto& b : blocks_) std::sort(b.begin(), b.end());
  if (std::any_of(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.empty(); }))
    throw DomainError("partition has an empty block");
  std::sort(blocks_.begin(), blocks_.end(),
            [](const Block& x, const Block& y) { return x.front() < y.front(); });
  validate();
}

SetPartition::SetPartition(Canonical, std::size_t n, std::vector<Block> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  validate();
}

SetPartition SetPartition::from_canonical_blocks(std::size_t n, std::vector<Block> blocks) {
  return SetPartition(Canonical{}, n, std::move(blocks));
}

void SetPartition::validate() const {
  if (n_ == 0) throw DomainError("partition of an empty set");
  std::vector<bool> seen(n_ + 1, false);
  std::size_t covered = 0;
  std::size_t prev_least = 0;
  for (const auto& b : blocks_) {
    if (b.empty()) throw DomainError("partition has an empty block");
    if (b.front() <= prev_least) throw DomainError("blocks not ordered by least element");
    prev_least = b.front();
    std::size_t prev = 0;
    for (std::size_t e : b) {
      if (e == 0 || e > n_) throw DomainError("element " + std::to_string(e) + " outside 1.." + std::to_string(n_));
      if (e <= prev) throw DomainError("block not sorted or has duplicates");
      if (seen[e]) throw DomainError("element " + std::to_string(e) + " in two blocks");
      seen[e] = true;
      prev = e;
      ++covered;
    }
  }
  if (covered != n_) throw DomainError("blocks do not cover the ground set");
}

std::vector<std::size_t> SetPartition::block_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(blocks_.size());
  for (const auto& b : blocks_) sizes.push_back(b.size());
  return sizes;
}

bool SetPartition::last_is_singleton() const noexcept {
  const auto& last = blocks_.back();
  return last.size() == 1 && last.front() == n_;
}

IntegerPartition::IntegerPartition(std::vector<std::size_t> sizes, std::vector<std::size_t> multiplicities)
    : a_(std::move(sizes)), r_(std::move(multiplicities)) {
  if (a_.size() != r_.size()) throw DomainError("size and multiplicity vectors differ in length");
  if (a_.empty()) throw DomainError("empty integer partition");
  for (std::size_t j = 0; j < a_.size(); ++j) {
    if (a_[j] == 0) throw DomainError("block size must be positive");
    if (r_[j] == 0) throw DomainError("multiplicity must be positive");
    if (j > 0 && a_[j] <= a_[j - 1]) throw DomainError("block sizes must be strictly increasing");
    n_ += a_[j] * r_[j];
    blocks_ += r_[j];
  }
}

IntegerPartition IntegerPartition::from_block_sizes(std::span<const std::size_t> sizes) {
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t s : sizes) ++counts[s];
  std::vector<std::size_t> a, r;
  a.reserve(counts.size());
  r.reserve(counts.size());
  for (auto [size, count] : counts) {
    a.push_back(size);
    r.push_back(count);
  }
  return IntegerPartition(std::move(a), std::move(r));
}

std::size_t IntegerPartition::multiplicity_of(std::size_t j) const noexcept {
  auto it = std::lower_bound(a_.begin(), a_.end(), j);
  return (it != a_.end() && *it == j) ? r_[static_cast<std::size_t>(it - a_.begin())] : 0;
}

SetPartition partition_from_table_assignment(std::span<const std::size_t> tables) {
  if (tables.empty()) throw DomainError("empty sample");
  std::vector<SetPartition::Block> blocks;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    std::size_t t = tables[i];
    if (t == blocks.size()) {
      blocks.emplace_back();
    } else if (t > blocks.size()) {
      throw DomainError("table ids must appear in order of first use");
    }
    blocks[t].push_back(i + 1);
  }
  return SetPartition::from_canonical_blocks(tables.size(), std::move(blocks));
}

SetPartition extend_with_suspect(const SetPartition& p) {
  auto blocks = p.blocks();
  blocks.push_back({p.n() + 1});
  return SetPartition::from_canonical_blocks(p.n() + 1, std::move(blocks));
}

SetPartition extend_with_trace(const SetPartition& p) {
  if (!p.last_is_singleton()) throw DomainError("not a rare-type configuration");
  auto blocks = p.blocks();
  blocks.back().push_back(p.n() + 1);
  return SetPartition::from_canonical_blocks(p.n() + 1, std::move(blocks));
}

IntegerPartition to_integer_partition(const SetPartition& p) {
  auto sizes = p.block_sizes();
  return IntegerPartition::from_block_sizes(sizes);
}

std::size_t singleton_count(const SetPartition& p) noexcept { return size_multiplicity(p, 1); }

std::size_t size_multiplicity(const SetPartition& p, std::size_t j) noexcept {
  return static_cast<std::size_t>(std::count_if(p.blocks().begin(), p.blocks().end(),
                                                [j](const auto& b) { return b.size() == j; }));
}

}  // namespace raretype
