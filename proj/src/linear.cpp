#include "unseen/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "unseen/numeric.hpp"

namespace unseen {

namespace {

// Above this index the tail switches to a normal approximation.
constexpr std::uint64_t kNormalTailThreshold = 10000;

// (1 - p)^n with exact endpoints.
double pow1m(double p, double n) {
  if (n == 0.0) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  return std::exp(n * std::log1p(-p));
}

// Signed estimator terms, ordered by total count sum_j i_j, summed pairwise.
template <typename WeightFn>
double alternating_sum(const Fingerprint& fp, const ExtrapolationPlan& plan, WeightFn&& weight) {
  require_same_m(fp.m(), plan.m(), "linear estimate");
  std::vector<std::pair<std::uint64_t, double>> terms;
  terms.reserve(fp.size());
  for (const auto& [key, count] : fp.entries()) {
    std::uint64_t total = 0;
    double magnitude = 1.0;
    for (std::size_t j = 0; j < key.size(); ++j) {
      if (key[j] == 0) continue;
      total += key[j];
      magnitude *= std::pow(plan.t[j], static_cast<double>(key[j]));
    }
    if (magnitude == 0.0) continue;
    // -(-1)^total = +1 for odd totals.
    const double sign = (total % 2 == 1) ? 1.0 : -1.0;
    terms.emplace_back(total, sign * magnitude * static_cast<double>(count) * weight(key));
  }
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> values(terms.size());
  std::transform(terms.begin(), terms.end(), values.begin(), [](const auto& t) { return t.second; });
  return numeric::pairwise_sum(values);
}

}  // namespace

ExtrapolationPlan::ExtrapolationPlan(std::vector<double> factors, Sizes sizes)
    : t(std::move(factors)), n(std::move(sizes)) {
  require_same_m(t.size(), n.size(), "ExtrapolationPlan");
  if (t.empty()) throw std::invalid_argument("ExtrapolationPlan: need at least one population");
  for (double v : t) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("ExtrapolationPlan: extrapolation factors must be finite and >= 0");
    }
  }
}

double ExtrapolationPlan::max_factor() const { return *std::max_element(t.begin(), t.end()); }

Sizes ExtrapolationPlan::new_counts() const {
  Sizes b(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    // nearbyint honours the default round-to-nearest-even mode.
    b[j] = static_cast<std::uint64_t>(std::nearbyint(t[j] * static_cast<double>(n[j])));
  }
  return b;
}

double ExtrapolationPlan::period_two_total() const {
  double total = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) total += t[j] * static_cast<double>(n[j]);
  return total;
}

double unbiased_estimate(const Fingerprint& fp, const ExtrapolationPlan& plan) {
  return alternating_sum(fp, plan, [](const IndexVector&) { return 1.0; });
}

double poisson_tail(std::uint64_t k, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("poisson_tail: rate must be positive");
  if (k == 0) return 1.0;
  const double kd = static_cast<double>(k);
  if (k > kNormalTailThreshold) {
    const double z = (kd - 0.5 - rate) / std::sqrt(rate);
    return 0.5 * std::erfc(z / std::sqrt(2.0));
  }
  numeric::CompensatedSum sum;
  if (kd <= rate) {
    // Complement of the lower sum; the result is bounded away from zero here.
    double term = std::exp(-rate);
    for (std::uint64_t l = 0; l < k; ++l) {
      sum.add(term);
      term *= rate / static_cast<double>(l + 1);
    }
    return std::clamp(1.0 - sum.value(), 0.0, 1.0);
  }
  // Upper tail summed directly; terms decrease geometrically once l > rate.
  double term = std::exp(-rate + kd * std::log(rate) - std::lgamma(kd + 1.0));
  for (std::uint64_t l = k; term > 0.0; ++l) {
    sum.add(term);
    if (term < 1e-18 * sum.value()) break;
    term *= rate / static_cast<double>(l + 1);
  }
  return std::clamp(sum.value(), 0.0, 1.0);
}

std::vector<bool> extrapolated_set(const ExtrapolationPlan& plan) {
  std::vector<bool> a(plan.m());
  for (std::size_t j = 0; j < plan.m(); ++j) a[j] = plan.t[j] > 1.0;
  return a;
}

double poisson_tail_weight(const IndexVector& i, const std::vector<bool>& extrapolated, double rate) {
  require_same_m(i.size(), extrapolated.size(), "poisson_tail_weight");
  std::uint64_t k = 0;
  for (std::size_t j = 0; j < i.size(); ++j) {
    if (extrapolated[j]) k += i[j];
  }
  return poisson_tail(k, rate);
}

double default_rate(const ExtrapolationPlan& plan) {
  const double tmax = plan.max_factor();
  if (tmax < 1.0) {
    throw NotApplicable("default_rate: largest extrapolation factor " + std::to_string(tmax) +
                        " is below 1, weights are identically 1");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < plan.m(); ++j) {
    total += static_cast<double>(plan.n[j]) * (plan.t[j] + 1.0);
  }
  return std::log(total) / (2.0 * tmax);
}

std::optional<double> resolve_rate(const ExtrapolationPlan& plan, const WeightConfig& cfg) {
  if (cfg.rate) {
    if (!(*cfg.rate > 0.0)) throw std::invalid_argument("WeightConfig: rate must be positive");
    return cfg.rate;
  }
  if (plan.max_factor() <= 1.0) return std::nullopt;
  return default_rate(plan);
}

double weighted_estimate(const Fingerprint& fp, const ExtrapolationPlan& plan,
                         const WeightConfig& cfg) {
  require_same_m(fp.m(), plan.m(), "weighted_estimate");
  const auto extrapolated = extrapolated_set(plan);
  const auto rate = resolve_rate(plan, cfg);
  if (!rate || std::none_of(extrapolated.begin(), extrapolated.end(), [](bool b) { return b; })) {
    return unbiased_estimate(fp, plan);
  }
  return alternating_sum(fp, plan, [&](const IndexVector& key) {
    return poisson_tail_weight(key, extrapolated, *rate);
  });
}

double exact_expected_new(const PopulationModel& model, const ExtrapolationPlan& plan,
                          SamplingScheme scheme) {
  require_same_m(model.m(), plan.m(), "exact_expected_new");
  const auto b = plan.new_counts();
  numeric::CompensatedSum total;
  for (const auto& p : model.probs()) {
    if (scheme == SamplingScheme::poissonized) {
      double seen = 0.0;
      double fresh = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double lambda = static_cast<double>(plan.n[j]) * p[j];
        seen += lambda;
        fresh += plan.t[j] * lambda;
      }
      total.add(std::exp(-seen) * -std::expm1(-fresh));
    } else {
      double unseen = 1.0;
      double log_missed = 0.0;
      bool surely_hit = false;
      for (std::size_t j = 0; j < p.size(); ++j) {
        unseen *= pow1m(p[j], static_cast<double>(plan.n[j]));
        if (b[j] == 0 || p[j] <= 0.0) continue;
        if (p[j] >= 1.0) {
          surely_hit = true;
        } else {
          log_missed += static_cast<double>(b[j]) * std::log1p(-p[j]);
        }
      }
      total.add(unseen * (surely_hit ? 1.0 : -std::expm1(log_missed)));
    }
  }
  return total.value();
}

double bias_bound(const ExtrapolationPlan& plan, double rate) {
  double total = 0.0;
  for (std::size_t j = 0; j < plan.m(); ++j) {
    if (plan.t[j] > 1.0) total += static_cast<double>(plan.n[j]) * (plan.t[j] + 1.0);
  }
  return total * std::exp(-rate);
}

double variance_bound(const ExtrapolationPlan& plan, double rate) {
  const double n = std::accumulate(plan.n.begin(), plan.n.end(), 0.0,
                                   [](double acc, std::uint64_t v) { return acc + static_cast<double>(v); });
  return n * std::exp(2.0 * rate * (plan.max_factor() - 1.0)) + plan.period_two_total();
}

}  // namespace unseen
