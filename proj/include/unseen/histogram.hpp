#pragma once

#include <map>

#include "unseen/fingerprint.hpp"
#include "unseen/types.hpp"

namespace unseen {

/// Sparse multi-population histogram: probability vector -> element mass.
///
/// Keys are quantized to 12 decimal digits for map identity; the stored
/// `alpha` is the value of the first insertion at that key and is what all
/// statistics read. Masses are nonnegative reals so fitted histograms and
/// true (integral) histograms share one type. Mass at the all-zero vector is
/// implicit and never stored.
class Histogram {
public:
  struct Entry {
    ProbVector alpha;
    double mass = 0.0;
  };
  using Key = std::vector<std::int64_t>;
  using Map = std::map<Key, Entry>;

  explicit Histogram(std::size_t m);

  /// Adds `mass` at `alpha`. Throws on out-of-range probabilities or negative
  /// mass; silently drops zero mass and the zero vector.
  void add(const ProbVector& alpha, double mass);

  /// Adds every entry of `other` (histogram concatenation).
  void merge(const Histogram& other);

  std::size_t m() const noexcept { return m_; }
  const Map& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Per-population probability mass sum_alpha alpha_j * H(alpha).
  std::vector<double> population_mass() const;

  /// Total element count sum_alpha H(alpha).
  double total_mass() const;

  static Key quantize(const ProbVector& alpha);

private:
  std::size_t m_;
  Map entries_;
};

/// Places each fingerprint entry at its observed frequency vector i/n.
Histogram empirical_histogram(const Fingerprint& fp, const Sizes& n);

bool is_zero(const ProbVector& alpha) noexcept;

}  // namespace unseen
