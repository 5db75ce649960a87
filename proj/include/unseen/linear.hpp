#pragma once

#include <optional>
#include <vector>

#include "unseen/fingerprint.hpp"
#include "unseen/model.hpp"

namespace unseen {

/// Period-two plan: population j receives t_j * n_j additional samples.
struct ExtrapolationPlan {
  std::vector<double> t;
  Sizes n;

  ExtrapolationPlan(std::vector<double> factors, Sizes sizes);

  std::size_t m() const noexcept { return t.size(); }
  double max_factor() const;
  /// b_j = round-half-to-even(t_j * n_j).
  Sizes new_counts() const;
  /// sum_j n_j t_j, the number of period-two samples.
  double period_two_total() const;
};

/// Poisson-tail weighting. An empty rate means "use default_rate(plan)".
struct WeightConfig {
  std::optional<double> rate;
};

enum class SamplingScheme { multinomial, poissonized };

/// Alternating-sign estimator: -sum_i prod_j (-t_j)^{i_j} phi_i. Unbiased for the number
/// of new distinct elements under Poissonized sampling.
double unbiased_estimate(const Fingerprint& fp, const ExtrapolationPlan& plan);

/// P(L >= k) for L ~ Poisson(rate); 1 when k == 0.
double poisson_tail(std::uint64_t k, double rate);

/// P(L >= sum_{j in A} i_j) with A given as a population mask.
double poisson_tail_weight(const IndexVector& i, const std::vector<bool>& extrapolated, double rate);

/// Populations with t_j > 1.
std::vector<bool> extrapolated_set(const ExtrapolationPlan& plan);

/// ln(sum_j n_j (t_j + 1)) / (2 max_j t_j). Throws NotApplicable when
/// max_j t_j < 1.
double default_rate(const ExtrapolationPlan& plan);

/// Rate actually used by weighted_estimate: the explicit rate if set, the
/// default rate when some t_j > 1, and nullopt when all weights are 1.
std::optional<double> resolve_rate(const ExtrapolationPlan& plan, const WeightConfig& cfg);

/// The unbiased estimator with every term multiplied by the Poisson-tail weight.
double weighted_estimate(const Fingerprint& fp, const ExtrapolationPlan& plan,
                         const WeightConfig& cfg = {});

/// Exact E[U] under the given sampling scheme. Poissonized:
/// sum_x e^{-sum_j lambda_xj}(1 - e^{-sum_j t_j lambda_xj}), lambda_xj = n_j p_xj.
/// Multinomial: sum_x prod_j (1-p_xj)^{n_j} (1 - prod_j (1-p_xj)^{b_j}).
double exact_expected_new(const PopulationModel& model, const ExtrapolationPlan& plan,
                          SamplingScheme scheme);

/// Upper bounds on the absolute bias and the variance of the weighted estimate
/// at the given rate.
double bias_bound(const ExtrapolationPlan& plan, double rate);
double variance_bound(const ExtrapolationPlan& plan, double rate);

}  // namespace unseen
