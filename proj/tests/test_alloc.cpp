#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "unseen/alloc.hpp"
#include "unseen/histstat.hpp"

using namespace unseen;
using namespace unseen::alloc;

namespace {

Histogram random_histogram(std::mt19937_64& gen, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Histogram h(m);
  for (int p = 0; p < 5; ++p) {
    ProbVector alpha(m);
    for (auto& a : alpha) a = u(gen) < 0.3 ? 0.0 : 0.2 * u(gen) * u(gen);
    h.add(alpha, 1.0 + 20.0 * u(gen));
  }
  return h;
}

std::uint64_t total(const Sizes& b) { return std::accumulate(b.begin(), b.end(), std::uint64_t{0}); }

}  // namespace

TEST(Allocation, ZeroBudget) {
  Histogram h(2);
  h.add({0.1, 0.2}, 5.0);
  const auto r = optimize_allocation({h, {3, 4}, 0, 1});
  EXPECT_EQ(r.b, (Sizes{0, 0}));
  EXPECT_EQ(r.predicted_gain, 0.0);
}

TEST(Allocation, PopulationWithoutUnseenMassGetsNothing) {
  Histogram h(2);
  h.add({0.0, 0.5}, 2.0);
  for (auto obj : {Objective::distinct, Objective::seen_at_least_2}) {
    const auto r = optimize_allocation({h, {0, 0}, 10, 1}, obj);
    EXPECT_EQ(r.b, (Sizes{0, 10}));
    EXPECT_EQ(r.baseline_gains.at("only_0"), 0.0);
    EXPECT_DOUBLE_EQ(r.baseline_gains.at("only_1"), r.predicted_gain);
  }
}

TEST(Allocation, GreedyMatchesExhaustiveOnSmallGrids) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const auto h = random_histogram(gen, m);
    Sizes n_old(m);
    for (auto& v : n_old) v = gen() % 30;
    const std::uint64_t step = 1 + gen() % 3;
    const std::uint64_t budget = step * (gen() % 21) + gen() % step;
    const AllocationProblem p{h, n_old, budget, step};
    const auto g = greedy_allocation(p, Objective::distinct);
    const auto e = exhaustive_allocation(p, Objective::distinct);
    EXPECT_EQ(total(g), budget);
    EXPECT_NEAR(allocation_gain(h, n_old, g, Objective::distinct), allocation_gain(h, n_old, e, Objective::distinct),
                1e-9);
  }
}

TEST(Allocation, OptimizedDominatesBaselines) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto h = random_histogram(gen, 3);
    for (auto obj : {Objective::distinct, Objective::seen_at_least_2}) {
      const auto r = optimize_allocation({h, {10, 20, 5}, 60, 2}, obj);
      EXPECT_EQ(total(r.b), 60u);
      double worst_single = std::numeric_limits<double>::infinity();
      for (const auto& [name, g] : r.baseline_gains) {
        EXPECT_GE(r.predicted_gain, g - 1e-9) << name;
        if (name.starts_with("only_")) worst_single = std::min(worst_single, g);
      }
      if (obj == Objective::distinct) EXPECT_GE(r.baseline_gains.at("even"), worst_single - 1e-9);
    }
  }
}

TEST(Allocation, GainMonotoneInBudget) {
  std::mt19937_64 gen(10);
  const auto h = random_histogram(gen, 2);
  double prev = 0.0;
  for (std::uint64_t budget : {0u, 5u, 10u, 40u, 100u}) {
    const auto r = optimize_allocation({h, {5, 5}, budget, 1});
    EXPECT_GE(r.predicted_gain, prev - 1e-12);
    prev = r.predicted_gain;
  }
}

TEST(Allocation, SeenTwiceFlags) {
  std::mt19937_64 gen(11);
  const auto h = random_histogram(gen, 3);
  const auto small = optimize_allocation({h, {1, 1, 1}, 30, 1}, Objective::seen_at_least_2);
  EXPECT_TRUE(small.exhaustive_checked);
  EXPECT_FALSE(small.heuristic);
  const auto exact = exhaustive_allocation({h, {1, 1, 1}, 30, 1}, Objective::seen_at_least_2);
  EXPECT_GE(small.predicted_gain,
            allocation_gain(h, {1, 1, 1}, exact, Objective::seen_at_least_2) - 1e-12);

  const auto large = optimize_allocation({h, {1, 1, 1}, 100000, 1}, Objective::seen_at_least_2);
  EXPECT_TRUE(large.heuristic);
  EXPECT_FALSE(large.exhaustive_checked);
  const auto distinct = optimize_allocation({h, {1, 1, 1}, 30, 1});
  EXPECT_FALSE(distinct.heuristic);
  EXPECT_FALSE(distinct.exhaustive_checked);
}

TEST(Allocation, HelpersAndValidation) {
  EXPECT_EQ(even_split(3, 10), (Sizes{4, 3, 3}));
  EXPECT_DOUBLE_EQ(grid_size(2, 3), 10.0);
  AllocationProblem p{Histogram(2), {1, 2}, 5000, 0};
  EXPECT_EQ(p.effective_step(), 5u);
  p.n_old = {1};
  EXPECT_THROW(optimize_allocation(p), DimensionMismatch);
}

TEST(AllocationCurve, Schedules) {
  Histogram h(2);
  h.add({0.1, 0.05}, 8.0);
  h.add({0.0, 0.3}, 2.0);
  const auto equal = ratio_schedule({1, 1}, {0, 10, 20, 40});
  const auto skewed = ratio_schedule({10, 1, 1}, {12, 13});
  EXPECT_EQ(equal[1], (Sizes{5, 5}));
  EXPECT_EQ(skewed[0], (Sizes{10, 1, 1}));
  EXPECT_EQ(total(skewed[1]), 13u);
  EXPECT_THROW(ratio_schedule({0, 0}, {1}), std::invalid_argument);

  const auto curve = allocation_curve(h, {3, 3}, {equal, ratio_schedule({0, 1}, {0, 10, 20, 40})});
  ASSERT_EQ(curve.size(), 8u);
  EXPECT_EQ(curve[0].total, 0u);
  EXPECT_EQ(curve[0].gain, 0.0);
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (curve[k].scenario == curve[k - 1].scenario) EXPECT_GE(curve[k].gain, curve[k - 1].gain);
  }
  EXPECT_NEAR(curve[2].gain, expected_new_distinct(h, {3, 3}, {10, 10}), 1e-15);
}
