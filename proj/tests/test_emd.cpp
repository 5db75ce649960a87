#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lp_oracle.hpp"
#include "unseen/emd.hpp"

using namespace unseen;
using test_support::DenseLp;
using test_support::emd_oracle;
using test_support::random_emd_histogram;

TEST(Emd, WorkedExample) {
  Histogram h(3), g(3);
  h.add({0.25, 0.25, 0.25}, 2);
  h.add({0.25, 0, 0}, 2);
  h.add({0, 0.25, 0}, 2);
  h.add({0, 0, 0.25}, 2);
  g.add({0.5, 0.5, 0.5}, 2);
  EXPECT_NEAR(emd(h, g), 0.5, 1e-9);
  EXPECT_NEAR(emd_oracle(h, g), 0.5, 1e-9);
}

TEST(Emd, TrivialCases) {
  Histogram one(1), empty(1);
  one.add({1.0}, 1.0);
  EXPECT_NEAR(emd(one, empty), 0.5, 1e-12);
  EXPECT_EQ(emd(one, one), 0.0);
  EXPECT_EQ(emd(empty, empty), 0.0);
  EXPECT_THROW(emd(one, Histogram(2)), DimensionMismatch);
}

TEST(Emd, MatchesLpOracleAndMetricAxioms) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const auto a = random_emd_histogram(gen, m);
    const auto b = random_emd_histogram(gen, m);
    const auto c = random_emd_histogram(gen, m);
    const double ab = emd(a, b), ba = emd(b, a), bc = emd(b, c), ac = emd(a, c);
    EXPECT_NEAR(ab, emd_oracle(a, b), 1e-9);
    EXPECT_NEAR(bc, emd_oracle(b, c), 1e-9);
    EXPECT_NEAR(ac, emd_oracle(a, c), 1e-9);
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_LE(ac, ab + bc + 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(emd(a, a), 0.0, 1e-12);
    if (!a.empty()) {
      Histogram shifted(m);
      for (const auto& [k, e] : a.entries()) shifted.add(e.alpha, e.mass * 0.5);
      EXPECT_GT(emd(a, shifted), 0.0);
    }
  }
}

TEST(SolveTransport, SmallProblems) {
  const std::vector<double> supply{3, 1}, demand{2, 2};
  const auto sol = solve_transport(supply, demand, [](std::size_t i, std::size_t k) { return i == k ? 0.0 : 1.0; });
  EXPECT_NEAR(sol.cost, 1.0, 1e-12);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(solve_transport(bad, demand, [](std::size_t, std::size_t) { return 0.0; }), std::invalid_argument);
}

TEST(SolveTransport, MatchesLpOracleOnRandomCosts) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t s = 1 + trial % 5, d = 1 + (trial / 5) % 5;
    std::vector<double> supply(s), demand(d);
    for (auto& v : supply) v = u(gen) < 0.2 ? 0.0 : u(gen);
    const double total = std::accumulate(supply.begin(), supply.end(), 0.0) + 0.5;
    supply[0] += 0.5;
    double left = total;
    for (std::size_t k = 0; k + 1 < d; ++k) {
      demand[k] = left * u(gen) * 0.5;
      left -= demand[k];
    }
    demand[d - 1] = left;
    std::vector<std::vector<double>> cost(s, std::vector<double>(d));
    for (auto& row : cost) {
      for (auto& v : row) v = u(gen);
    }
    std::vector<std::vector<double>> a(s + d, std::vector<double>(s * d, 0.0));
    std::vector<double> b(s + d), c(s * d);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        a[i][i * d + k] = 1.0;
        a[s + k][i * d + k] = 1.0;
        c[i * d + k] = cost[i][k];
      }
      b[i] = supply[i];
    }
    for (std::size_t k = 0; k < d; ++k) b[s + k] = demand[k];
    const auto sol = solve_transport(supply, demand, [&](std::size_t i, std::size_t k) { return cost[i][k]; });
    EXPECT_NEAR(sol.cost, DenseLp(a, b, c).solve(), 1e-9);
  }
}
