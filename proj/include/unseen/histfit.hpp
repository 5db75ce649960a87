#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "unseen/fingerprint.hpp"
#include "unseen/histogram.hpp"
#include "unseen/rng.hpp"

#include "json.hpp"

namespace unseen {

enum class FitObjective { counts, loglik };

/// Histogram-fitting hyperparameters.
struct FitConfig {
  /// Number of fitted support points; 0 selects max(10, #keys with count >= 2).
  std::size_t support_size = 0;
  FitObjective objective = FitObjective::counts;
  std::size_t restarts = 5;
  /// Candidate evaluations allowed per restart.
  std::size_t max_evals = 200000;
  /// Initial weight of the quadratic mass penalty; escalated x10 per round.
  double penalty_weight = 1e3;
  std::uint64_t seed = rng::kDefaultSeed;
  double mass_tolerance = 1e-4;
  /// Cost per fitted element added to the loss during optimization. Among
  /// fits of nearly equal quality it favours fewer elements, which keeps
  /// mass the fingerprint cannot see from piling up at tiny rates. 0 fits
  /// the bare objective.
  double support_penalty = 0.0;

  void validate() const;
};

struct FitDiagnostics {
  std::size_t evaluations = 0;
  std::size_t support_size = 0;
  std::size_t best_restart = 0;
  std::size_t penalty_rounds = 0;
  bool degenerate = false;
  /// Per-population total mass minus one, for the returned histogram.
  std::vector<double> mass_residuals;
  /// Minimized loss of each restart (counts objective or negative loglik,
  /// plus the support penalty).
  std::vector<double> restart_losses;
  std::string note;
};

struct FitResult {
  Histogram histogram;
  Histogram emp_part;
  Histogram fitted_part;
  /// Counts objective (minimized) or log-likelihood proxy (maximized).
  double objective_value = 0.0;
  FitDiagnostics diagnostics;
};

/// Moves every fingerprint entry equal to one into an empirical histogram at
/// its observed frequency i/n; the remaining fingerprint keeps counts >= 2.
std::pair<Histogram, Fingerprint> split_ones(const Fingerprint& fp, const Sizes& n);

/// sum over keys with count >= 2 of |phi_i - E_H[phi_i]| / sqrt(1 + phi_i).
double objective_counts(const Histogram& h, const Fingerprint& fp_rest, const Sizes& n);

/// sum over keys with count >= 2 of log Poisson(phi_i; E_H[phi_i]), with the
/// expectation floored at 1e-12.
double objective_loglik(const Histogram& h, const Fingerprint& fp_rest, const Sizes& n);

/// Recovers the multi-population histogram behind `fp` (sample sizes n).
/// Deterministic for a given configuration. Throws Infeasible when the
/// count-one entries alone exceed unit mass on some population.
FitResult fit_histogram(const Fingerprint& fp, const Sizes& n, const FitConfig& cfg = {});

nlohmann::json fit_config_to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const nlohmann::json& j);
nlohmann::json fit_result_to_json(const FitResult& r);

namespace detail {
/// Observer called with every (key, count) an objective reads. Test-only hook;
/// thread-local so concurrent fits do not interfere.
using KeyProbe = std::function<void(const IndexVector&, std::uint64_t)>;
void set_key_probe(KeyProbe probe);
}  // namespace detail

}  // namespace unseen
