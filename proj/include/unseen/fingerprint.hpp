#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>

#include "unseen/types.hpp"

namespace unseen {

/// Observed multiplicities of each label in each of m populations.
/// Labels whose multiplicity vector is all zero are never stored.
class SampleSet {
public:
  explicit SampleSet(std::size_t m);

  /// Record `count` observations of `label` in population `pop` (0-based).
  void add(std::size_t pop, Label label, std::uint32_t count = 1);

  std::size_t m() const noexcept { return m_; }
  const Sizes& sizes() const noexcept { return sizes_; }
  const std::unordered_map<Label, IndexVector>& counts() const noexcept { return counts_; }
  std::size_t distinct() const noexcept { return counts_.size(); }

  /// Samples of population `pop` alone, as a one-population set.
  SampleSet population(std::size_t pop) const;

private:
  std::size_t m_;
  Sizes sizes_;
  std::unordered_map<Label, IndexVector> counts_;
};

/// Sparse m-dimensional fingerprint: entries[i] is the number of distinct
/// elements observed exactly i_j times in population j. The all-zero key is
/// never present. Keys are kept ordered so iteration is reproducible.
class Fingerprint {
public:
  using Map = std::map<IndexVector, std::uint64_t>;

  Fingerprint(std::size_t m, Sizes dims);

  /// Adds `count` to the entry at `key`. Zero keys and zero counts are ignored;
  /// keys exceeding `dims` on any axis throw.
  void add(const IndexVector& key, std::uint64_t count);

  std::size_t m() const noexcept { return m_; }
  const Sizes& dims() const noexcept { return dims_; }
  const Map& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Entry count at `key`, zero when absent.
  std::uint64_t at(const IndexVector& key) const;

  bool operator==(const Fingerprint& other) const = default;

private:
  std::size_t m_;
  Sizes dims_;
  Map entries_;
};

Fingerprint build_fingerprint(const SampleSet& samples);

/// One-population fingerprint along axis `j` (0-based).
Fingerprint marginal_fingerprint(const Fingerprint& fp, std::size_t j);

/// Total number of distinct observed elements.
std::uint64_t observed_distinct(const Fingerprint& fp);

/// Per-axis sample count implied by the fingerprint: sum of i_j * count.
Sizes implied_sizes(const Fingerprint& fp);

bool is_zero(const IndexVector& key) noexcept;

}  // namespace unseen
