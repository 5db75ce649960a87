#pragma once

// Planted-histogram instances shared by the unit tests and the acceptance
// binary: a random H* with unit mass per population, and the fingerprint
// obtained by rounding its expected fingerprint.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "unseen/histfit.hpp"
#include "unseen/histstat.hpp"

namespace unseen::test_support {

struct PlantedInstance {
  Histogram truth{1};
  Fingerprint fp{1, {1}};
  Sizes n;
};

// Keys in the box [0, cap_j], zero vector excluded.
inline std::vector<IndexVector> box_keys(const Sizes& cap) {
  std::vector<IndexVector> keys;
  IndexVector key(cap.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j == cap.size()) {
      if (!is_zero(key)) keys.push_back(key);
      return;
    }
    for (std::uint32_t i = 0; i <= cap[j]; ++i) {
      key[j] = i;
      rec(j + 1);
    }
  };
  rec(0);
  return keys;
}

// Draws H* with `points` support points on m populations. Rates are at least
// 0.15 / n_j on active axes, inside the fitter's search space. Expected
// entries below 1.5 are dropped so that no key has count one and H* meets the
// fitter's mass constraint exactly. Instances with fewer than three keys are
// redrawn.
inline PlantedInstance make_planted(std::mt19937_64& gen, std::size_t m, std::size_t points) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    PlantedInstance inst;
    inst.n.resize(m);
    for (auto& v : inst.n) v = 50 + gen() % 251;
    std::vector<std::pair<ProbVector, double>> raw;
    std::vector<double> mass(m, 0.0);
    for (std::size_t p = 0; p < points; ++p) {
      ProbVector a(m);
      for (auto& x : a) x = (m > 1 && u(gen) < 0.2) ? 0.0 : std::exp(std::log(0.5) + u(gen) * std::log(16.0));
      const double h = 5.0 + 55.0 * u(gen);
      for (std::size_t j = 0; j < m; ++j) mass[j] += a[j] * h;
      raw.emplace_back(std::move(a), h);
    }
    bool ok = std::all_of(mass.begin(), mass.end(), [](double v) { return v > 0.0; });
    if (!ok) continue;
    inst.truth = Histogram(m);
    Sizes cap(m, 0);
    for (auto& [a, h] : raw) {
      for (std::size_t j = 0; j < m; ++j) {
        a[j] /= mass[j];
        if (a[j] > 0.0 && (a[j] < 0.15 / static_cast<double>(inst.n[j]) || a[j] > 0.9)) ok = false;
        const double mean = a[j] * static_cast<double>(inst.n[j]);
        cap[j] = std::max<std::uint64_t>(cap[j], static_cast<std::uint64_t>(std::ceil(mean + 8.0 * std::sqrt(mean) + 10.0)));
      }
      inst.truth.add(a, h);
    }
    if (!ok) continue;
    for (std::size_t j = 0; j < m; ++j) cap[j] = std::min(cap[j], inst.n[j]);
    const auto keys = box_keys(cap);
    inst.fp = Fingerprint(m, inst.n);
    for (const auto& [key, v] : expected_fingerprint(inst.truth, inst.n, keys)) {
      if (v >= 1.5) inst.fp.add(key, static_cast<std::uint64_t>(std::llround(v)));
    }
    if (inst.fp.size() >= 3) return inst;
  }
}

}  // namespace unseen::test_support
