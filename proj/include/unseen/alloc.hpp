#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unseen/histogram.hpp"

namespace unseen::alloc {

enum class Objective { distinct, seen_at_least_2 };

struct AllocationProblem {
  Histogram h{1};
  Sizes n_old;
  std::uint64_t budget = 0;
  /// Grid granularity; 0 selects max(1, budget / 1000).
  std::uint64_t step = 0;

  void validate() const;
  std::uint64_t effective_step() const;
};

struct AllocationResult {
  Sizes b;
  double predicted_gain = 0.0;
  /// "even" and "only_<j>" for every population j.
  std::map<std::string, double> baseline_gains;
  /// True when the objective has no optimality guarantee for greedy and the
  /// grid was too large to cross-check exhaustively.
  bool heuristic = false;
  /// True when an exhaustive grid search was run as a cross-check.
  bool exhaustive_checked = false;
};

/// Expected number of new elements (or new elements seen at least twice)
/// from b additional samples after n_old.
double allocation_gain(const Histogram& h, const Sizes& n_old, const Sizes& b, Objective objective);

/// Greedy marginal allocation in units of `step`, the remainder B mod step
/// given as one final increment, followed by pairwise step exchanges while
/// they strictly improve the gain. Ties go to the lowest population index.
Sizes greedy_allocation(const AllocationProblem& p, Objective objective);

/// Best point of the full step grid {b : sum b <= B, b_j in step * Z}, with
/// the remainder placed greedily as in greedy_allocation. Cost grows as
/// C(B/step + m, m); callers check grid_size first.
Sizes exhaustive_allocation(const AllocationProblem& p, Objective objective);

/// Number of points of the step grid.
double grid_size(std::size_t m, std::uint64_t units);

/// Greedy allocation plus baselines. For seen_at_least_2 the greedy result is
/// cross-checked against exhaustive search when the grid has at most 1e4
/// points and replaced by it if worse; otherwise the result is flagged
/// heuristic.
AllocationResult optimize_allocation(const AllocationProblem& p, Objective objective = Objective::distinct);

/// Even split of the budget, remainder to the lowest indices.
Sizes even_split(std::size_t m, std::uint64_t budget);

struct CurvePoint {
  std::size_t scenario = 0;
  std::uint64_t total = 0;
  double gain = 0.0;
};

/// Expected new distinct elements along each schedule of allocations.
std::vector<CurvePoint> allocation_curve(const Histogram& h, const Sizes& n_old,
                                         const std::vector<std::vector<Sizes>>& scenarios);

/// Schedule allocating each total in `totals` in proportion to `ratio`
/// (largest-remainder rounding, ties to lower indices).
std::vector<Sizes> ratio_schedule(const std::vector<double>& ratio, const std::vector<std::uint64_t>& totals);

}  // namespace unseen::alloc
