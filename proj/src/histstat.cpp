#include "unseen/histstat.hpp"

#include <cmath>
#include <string>

#include "unseen/kernels.hpp"
#include "unseen/numeric.hpp"

namespace unseen {

namespace {

double pow1m(double a, double n) {
  if (n == 0.0 || a <= 0.0) return 1.0;
  if (a >= 1.0) return 0.0;
  return std::exp(n * std::log1p(-a));
}

std::vector<double> as_reals(const Sizes& s) {
  std::vector<double> v(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) v[j] = static_cast<double>(s[j]);
  return v;
}

}  // namespace

std::map<IndexVector, double> expected_fingerprint(const Histogram& h, const Sizes& n,
                                                   std::span<const IndexVector> keys) {
  require_same_m(n.size(), h.m(), "expected_fingerprint");
  const auto support = kernels::SupportTable::from_histogram(h);
  const kernels::KeyTable table(keys, n);
  std::map<IndexVector, double> out;
  std::vector<double> index(h.m());
  std::vector<double> rest(h.m());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (is_zero(keys[i])) throw std::invalid_argument("expected_fingerprint: zero key requested");
    for (std::size_t j = 0; j < h.m(); ++j) {
      index[j] = table.index[j * table.stride + i];
      rest[j] = table.rest[j * table.stride + i];
    }
    out[keys[i]] = kernels::binomial_mixture(support, index, rest, table.log_coeff[i]);
  }
  return out;
}

double expected_distinct(const Histogram& h, const Sizes& n) {
  require_same_m(n.size(), h.m(), "expected_distinct");
  const auto support = kernels::SupportTable::from_histogram(h);
  const std::vector<double> zero(h.m(), 0.0);
  return kernels::survival_gain(support, zero, as_reals(n));
}

double expected_new_distinct(const Histogram& h, const Sizes& n_old, const Sizes& b) {
  require_same_m(n_old.size(), h.m(), "expected_new_distinct");
  require_same_m(b.size(), h.m(), "expected_new_distinct");
  const auto support = kernels::SupportTable::from_histogram(h);
  return kernels::survival_gain(support, as_reals(n_old), as_reals(b));
}

double expected_new_seen_at_least(const Histogram& h, const Sizes& n_old, const Sizes& b,
                                  unsigned k) {
  if (k == 1) return expected_new_distinct(h, n_old, b);
  if (k != 2) throw std::invalid_argument("expected_new_seen_at_least: k must be 1 or 2");
  require_same_m(n_old.size(), h.m(), "expected_new_seen_at_least");
  require_same_m(b.size(), h.m(), "expected_new_seen_at_least");
  const std::size_t m = h.m();
  numeric::CompensatedSum total;
  std::vector<double> miss(m);
  for (const auto& [key, entry] : h.entries()) {
    const auto& alpha = entry.alpha;
    double unseen = 1.0;
    double none = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      unseen *= pow1m(alpha[j], static_cast<double>(n_old[j]));
      miss[j] = pow1m(alpha[j], static_cast<double>(b[j]));
      none *= miss[j];
    }
    if (unseen == 0.0) continue;
    // Exactly one hit overall: one hit in population j, none elsewhere.
    double one = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (b[j] == 0 || alpha[j] <= 0.0) continue;
      double others = 1.0;
      for (std::size_t l = 0; l < m; ++l) {
        if (l != j) others *= miss[l];
      }
      one += static_cast<double>(b[j]) * alpha[j] *
             pow1m(alpha[j], static_cast<double>(b[j] - 1)) * others;
    }
    const double at_least_two = std::max(0.0, 1.0 - none - one);
    total.add(entry.mass * unseen * at_least_two);
  }
  return total.value();
}

double covered_mass(const Histogram& h, const Sizes& n) {
  require_same_m(n.size(), h.m(), "covered_mass");
  numeric::CompensatedSum total;
  for (const auto& [key, entry] : h.entries()) {
    double covered = 0.0;
    for (std::size_t j = 0; j < h.m(); ++j) {
      covered += entry.alpha[j] * (1.0 - pow1m(entry.alpha[j], static_cast<double>(n[j])));
    }
    total.add(entry.mass * covered);
  }
  return total.value();
}

double coverage_multiplier(const Histogram& h, const Sizes& shape, double fraction) {
  require_same_m(shape.size(), h.m(), "coverage_multiplier");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("coverage_multiplier: fraction must be in (0, 1)");
  }
  double target = 0.0;
  for (double v : h.population_mass()) target += v;
  target *= fraction;
  auto sizes_at = [&](double c) {
    Sizes s(shape.size());
    for (std::size_t j = 0; j < shape.size(); ++j) {
      s[j] = static_cast<std::uint64_t>(std::ceil(c * static_cast<double>(shape[j])));
    }
    return s;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (covered_mass(h, sizes_at(hi)) < target) {
    hi *= 2.0;
    if (hi > 1e15) throw NotApplicable("coverage_multiplier: fraction not reachable");
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (covered_mass(h, sizes_at(mid)) >= target ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace unseen
