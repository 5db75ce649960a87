#include "unseen/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace unseen {

namespace {
constexpr double kQuantum = 1e12;
}

bool is_zero(const ProbVector& alpha) noexcept {
  return std::all_of(alpha.begin(), alpha.end(), [](double v) { return v == 0.0; });
}

Histogram::Histogram(std::size_t m) : m_(m) {
  if (m_ == 0) throw std::invalid_argument("Histogram: population count must be positive");
}

Histogram::Key Histogram::quantize(const ProbVector& alpha) {
  Key key(alpha.size());
  std::transform(alpha.begin(), alpha.end(), key.begin(),
                 [](double a) { return static_cast<std::int64_t>(std::llround(a * kQuantum)); });
  return key;
}

void Histogram::add(const ProbVector& alpha, double mass) {
  require_same_m(alpha.size(), m_, "Histogram::add");
  if (!(mass >= 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("Histogram::add: mass must be finite and nonnegative");
  }
  for (double a : alpha) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw std::invalid_argument("Histogram::add: probability " + std::to_string(a) +
                                  " outside [0,1]");
    }
  }
  if (mass == 0.0 || is_zero(alpha)) return;
  auto key = quantize(alpha);
  if (std::all_of(key.begin(), key.end(), [](std::int64_t v) { return v == 0; })) return;
  auto [it, inserted] = entries_.try_emplace(std::move(key), Entry{alpha, 0.0});
  it->second.mass += mass;
}

void Histogram::merge(const Histogram& other) {
  require_same_m(other.m_, m_, "Histogram::merge");
  for (const auto& [key, entry] : other.entries_) add(entry.alpha, entry.mass);
}

std::vector<double> Histogram::population_mass() const {
  std::vector<double> mass(m_, 0.0);
  for (const auto& [key, entry] : entries_) {
    for (std::size_t j = 0; j < m_; ++j) mass[j] += entry.alpha[j] * entry.mass;
  }
  return mass;
}

double Histogram::total_mass() const {
  double total = 0.0;
  for (const auto& [key, entry] : entries_) total += entry.mass;
  return total;
}

Histogram empirical_histogram(const Fingerprint& fp, const Sizes& n) {
  require_same_m(n.size(), fp.m(), "empirical_histogram");
  for (std::size_t j = 0; j < n.size(); ++j) {
    if (n[j] == 0) throw std::invalid_argument("empirical_histogram: sample sizes must be >= 1");
    if (fp.dims()[j] > n[j]) {
      throw std::invalid_argument("empirical_histogram: fingerprint dimension exceeds n");
    }
  }
  Histogram h(fp.m());
  ProbVector alpha(fp.m());
  for (const auto& [key, count] : fp.entries()) {
    for (std::size_t j = 0; j < fp.m(); ++j) {
      alpha[j] = static_cast<double>(key[j]) / static_cast<double>(n[j]);
    }
    h.add(alpha, static_cast<double>(count));
  }
  return h;
}

}  // namespace unseen
