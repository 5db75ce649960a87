#include "unseen/fingerprint.hpp"

#include <algorithm>
#include <string>

namespace unseen {

bool is_zero(const IndexVector& key) noexcept {
  return std::all_of(key.begin(), key.end(), [](std::uint32_t v) { return v == 0; });
}

SampleSet::SampleSet(std::size_t m) : m_(m), sizes_(m, 0) {
  if (m == 0) throw std::invalid_argument("SampleSet: population count must be positive");
}

void SampleSet::add(std::size_t pop, Label label, std::uint32_t count) {
  if (pop >= m_) {
    throw std::out_of_range("SampleSet::add: population " + std::to_string(pop) +
                            " out of range for m=" + std::to_string(m_));
  }
  if (count == 0) return;
  auto [it, inserted] = counts_.try_emplace(label, IndexVector(m_, 0));
  it->second[pop] += count;
  sizes_[pop] += count;
}

SampleSet SampleSet::population(std::size_t pop) const {
  if (pop >= m_) throw std::out_of_range("SampleSet::population: index out of range");
  SampleSet out(1);
  for (const auto& [label, counts] : counts_) out.add(0, label, counts[pop]);
  return out;
}

Fingerprint::Fingerprint(std::size_t m, Sizes dims) : m_(m), dims_(std::move(dims)) {
  if (m_ == 0) throw std::invalid_argument("Fingerprint: population count must be positive");
  require_same_m(dims_.size(), m_, "Fingerprint dims");
}

void Fingerprint::add(const IndexVector& key, std::uint64_t count) {
  require_same_m(key.size(), m_, "Fingerprint::add");
  if (count == 0 || is_zero(key)) return;
  for (std::size_t j = 0; j < m_; ++j) {
    if (key[j] > dims_[j]) {
      throw std::out_of_range("Fingerprint::add: index " + std::to_string(key[j]) +
                              " exceeds dimension " + std::to_string(dims_[j]) + " on axis " +
                              std::to_string(j));
    }
  }
  entries_[key] += count;
}

std::uint64_t Fingerprint::at(const IndexVector& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second;
}

Fingerprint build_fingerprint(const SampleSet& samples) {
  Fingerprint fp(samples.m(), samples.sizes());
  for (const auto& [label, counts] : samples.counts()) fp.add(counts, 1);
  return fp;
}

Fingerprint marginal_fingerprint(const Fingerprint& fp, std::size_t j) {
  if (j >= fp.m()) {
    throw std::out_of_range("marginal_fingerprint: axis " + std::to_string(j) +
                            " out of range for m=" + std::to_string(fp.m()));
  }
  Fingerprint out(1, Sizes{fp.dims()[j]});
  for (const auto& [key, count] : fp.entries()) {
    if (key[j] > 0) out.add(IndexVector{key[j]}, count);
  }
  return out;
}

std::uint64_t observed_distinct(const Fingerprint& fp) {
  std::uint64_t total = 0;
  for (const auto& [key, count] : fp.entries()) total += count;
  return total;
}

Sizes implied_sizes(const Fingerprint& fp) {
  Sizes n(fp.m(), 0);
  for (const auto& [key, count] : fp.entries()) {
    for (std::size_t j = 0; j < fp.m(); ++j) n[j] += std::uint64_t{key[j]} * count;
  }
  return n;
}

}  // namespace unseen
