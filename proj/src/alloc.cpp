#include "unseen/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "unseen/histstat.hpp"
#include "unseen/parallel.hpp"

namespace unseen::alloc {

namespace {

constexpr double kGridLimit = 1e4;

bool improves(double candidate, double incumbent) {
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

// Index of the population whose increment by `amount` gains the most; ties
// go to the lowest index.
std::size_t best_increment(const AllocationProblem& p, Objective objective, const Sizes& b,
                           std::uint64_t amount, double& best_gain) {
  const std::size_t m = b.size();
  std::vector<double> gains(m);
  parallel_for(m, [&](std::size_t j) {
    Sizes trial = b;
    trial[j] += amount;
    gains[j] = allocation_gain(p.h, p.n_old, trial, objective);
  });
  std::size_t best = 0;
  for (std::size_t j = 1; j < m; ++j) {
    if (improves(gains[j], gains[best])) best = j;
  }
  best_gain = gains[best];
  return best;
}

}  // namespace

void AllocationProblem::validate() const {
  require_same_m(n_old.size(), h.m(), "AllocationProblem");
}

std::uint64_t AllocationProblem::effective_step() const {
  return step ? step : std::max<std::uint64_t>(1, budget / 1000);
}

double allocation_gain(const Histogram& h, const Sizes& n_old, const Sizes& b, Objective objective) {
  return objective == Objective::distinct ? expected_new_distinct(h, n_old, b)
                                          : expected_new_seen_at_least(h, n_old, b, 2);
}

double grid_size(std::size_t m, std::uint64_t units) {
  // C(units + m, m) points with sum <= units.
  return std::exp(std::lgamma(static_cast<double>(units + m) + 1.0) -
                  std::lgamma(static_cast<double>(units) + 1.0) - std::lgamma(static_cast<double>(m) + 1.0));
}

Sizes greedy_allocation(const AllocationProblem& p, Objective objective) {
  p.validate();
  const std::size_t m = p.h.m();
  const std::uint64_t step = p.effective_step();
  const std::uint64_t units = p.budget / step;
  const std::uint64_t rem = p.budget % step;
  Sizes b(m, 0);
  if (p.budget == 0) return b;

  double gain = 0.0;
  for (std::uint64_t u = 0; u < units; ++u) b[best_increment(p, objective, b, step, gain)] += step;
  if (rem > 0) b[best_increment(p, objective, b, rem, gain)] += rem;
  gain = allocation_gain(p.h, p.n_old, b, objective);

  // Pairwise exchanges of one step, first improving move in index order.
  const std::size_t max_passes = 4 * static_cast<std::size_t>(units + 1) * m;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t from = 0; from < m && !moved; ++from) {
      if (b[from] < step) continue;
      for (std::size_t to = 0; to < m && !moved; ++to) {
        if (to == from) continue;
        Sizes trial = b;
        trial[from] -= step;
        trial[to] += step;
        const double g = allocation_gain(p.h, p.n_old, trial, objective);
        if (improves(g, gain)) {
          b = trial;
          gain = g;
          moved = true;
        }
      }
    }
    if (!moved) break;
  }
  return b;
}

Sizes exhaustive_allocation(const AllocationProblem& p, Objective objective) {
  p.validate();
  const std::size_t m = p.h.m();
  const std::uint64_t step = p.effective_step();
  const std::uint64_t units = p.budget / step;
  const std::uint64_t rem = p.budget % step;
  Sizes best(m, 0);
  double best_gain = -1.0;
  Sizes b(m, 0);
  // The gain never decreases with more samples, so only full allocations of
  // the grid need to be visited.
  std::function<void(std::size_t, std::uint64_t)> visit = [&](std::size_t j, std::uint64_t left) {
    if (j + 1 == m) {
      b[j] = left * step;
      for (std::size_t r = 0; r < (rem > 0 ? m : 1); ++r) {
        Sizes trial = b;
        if (rem > 0) trial[r] += rem;
        const double g = allocation_gain(p.h, p.n_old, trial, objective);
        if (improves(g, best_gain)) {
          best_gain = g;
          best = trial;
        }
      }
      return;
    }
    for (std::uint64_t u = left + 1; u-- > 0;) {
      b[j] = u * step;
      visit(j + 1, left - u);
    }
  };
  visit(0, units);
  return best;
}

Sizes even_split(std::size_t m, std::uint64_t budget) {
  Sizes b(m, budget / m);
  for (std::size_t j = 0; j < budget % m; ++j) ++b[j];
  return b;
}

AllocationResult optimize_allocation(const AllocationProblem& p, Objective objective) {
  p.validate();
  const std::size_t m = p.h.m();
  AllocationResult out;
  out.b = greedy_allocation(p, objective);
  out.predicted_gain = allocation_gain(p.h, p.n_old, out.b, objective);

  if (objective == Objective::seen_at_least_2) {
    const std::uint64_t units = p.budget / p.effective_step();
    if (grid_size(m, units) <= kGridLimit) {
      out.exhaustive_checked = true;
      const Sizes exact = exhaustive_allocation(p, objective);
      const double g = allocation_gain(p.h, p.n_old, exact, objective);
      if (improves(g, out.predicted_gain)) {
        out.b = exact;
        out.predicted_gain = g;
      }
    } else {
      out.heuristic = true;
    }
  }

  out.baseline_gains["even"] = allocation_gain(p.h, p.n_old, even_split(m, p.budget), objective);
  for (std::size_t j = 0; j < m; ++j) {
    Sizes single(m, 0);
    single[j] = p.budget;
    out.baseline_gains["only_" + std::to_string(j)] = allocation_gain(p.h, p.n_old, single, objective);
  }
  return out;
}

std::vector<CurvePoint> allocation_curve(const Histogram& h, const Sizes& n_old,
                                         const std::vector<std::vector<Sizes>>& scenarios) {
  std::vector<CurvePoint> out;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (const auto& b : scenarios[s]) {
      require_same_m(b.size(), h.m(), "allocation_curve");
      CurvePoint pt;
      pt.scenario = s;
      pt.total = std::accumulate(b.begin(), b.end(), std::uint64_t{0});
      pt.gain = expected_new_distinct(h, n_old, b);
      out.push_back(pt);
    }
  }
  return out;
}

std::vector<Sizes> ratio_schedule(const std::vector<double>& ratio, const std::vector<std::uint64_t>& totals) {
  const double sum = std::accumulate(ratio.begin(), ratio.end(), 0.0);
  if (ratio.empty() || !(sum > 0.0)) throw std::invalid_argument("ratio_schedule: ratios must have a positive sum");
  for (double r : ratio) {
    if (!(r >= 0.0)) throw std::invalid_argument("ratio_schedule: negative ratio");
  }
  std::vector<Sizes> out;
  for (std::uint64_t total : totals) {
    const std::size_t m = ratio.size();
    Sizes b(m);
    std::vector<std::pair<double, std::size_t>> frac(m);
    std::uint64_t used = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double exact = static_cast<double>(total) * ratio[j] / sum;
      b[j] = static_cast<std::uint64_t>(std::floor(exact));
      used += b[j];
      frac[j] = {exact - std::floor(exact), j};
    }
    std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& c) { return a.first > c.first; });
    for (std::size_t k = 0; used < total; ++k, ++used) ++b[frac[k % m].second];
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace unseen::alloc
