#pragma once

#include <functional>
#include <span>

#include "unseen/histogram.hpp"

namespace unseen {

/// Largest combined support (both histograms, excluding the zero vector) the
/// exact solver accepts before signalling TooLarge.
inline constexpr std::size_t kEmdMaxSupport = 10000;

struct TransportSolution {
  double cost = 0.0;
  std::size_t pivots = 0;
};

/// Exact balanced transportation problem: ship supply[i] from each source to
/// meet demand[k] at each sink at per-unit cost(i, k), arcs uncapacitated.
/// Solved by primal network simplex. Supplies and demands must be
/// nonnegative with equal totals (relative tolerance 1e-9).
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const std::function<double(std::size_t, std::size_t)>& cost);

/// Multi-population earthmover distance: minimum cost of turning h1 into h2
/// when moving one element from alpha to alpha' costs ||alpha - alpha'||_1 / (2m)
/// and the zero vector holds unlimited elements on both sides.
double emd(const Histogram& h1, const Histogram& h2);

}  // namespace unseen
