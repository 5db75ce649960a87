#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "planted.hpp"
#include "unseen/emd.hpp"
#include "unseen/histfit.hpp"
#include "unseen/histstat.hpp"
#include "unseen/synth.hpp"

using namespace unseen;

namespace {

Fingerprint worked_fingerprint() {
  Fingerprint fp(2, {5, 7});
  fp.add({0, 1}, 1);
  fp.add({1, 0}, 1);
  fp.add({1, 1}, 2);
  fp.add({1, 2}, 2);
  return fp;
}

Fingerprint sample_fingerprint(const PopulationModel& model, const Sizes& n, std::uint64_t seed) {
  return build_fingerprint(synth::draw_samples(model, n, synth::Scheme::multinomial, seed));
}

double max_abs(const std::vector<double>& v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::abs(x));
  return out;
}

FitConfig quick_config() {
  FitConfig cfg;
  cfg.restarts = 3;
  cfg.max_evals = 20000;
  return cfg;
}

}  // namespace

TEST(SplitOnes, WorkedExample) {
  const auto [emp, rest] = split_ones(worked_fingerprint(), {5, 7});
  EXPECT_EQ(rest.entries(), (Fingerprint::Map{{{1, 1}, 2}, {{1, 2}, 2}}));
  ASSERT_EQ(emp.size(), 2u);
  EXPECT_TRUE(emp.entries().contains(Histogram::quantize({0.0, 1.0 / 7})));
  EXPECT_TRUE(emp.entries().contains(Histogram::quantize({0.2, 0.0})));
  EXPECT_DOUBLE_EQ(emp.total_mass(), 2.0);
}

TEST(SplitOnes, AllTwosOrAllOnes) {
  Fingerprint twos(1, {9});
  twos.add({1}, 3);
  twos.add({3}, 2);
  const auto [emp, rest] = split_ones(twos, {9});
  EXPECT_TRUE(emp.empty());
  EXPECT_EQ(rest, twos);

  Fingerprint ones(1, {9});
  ones.add({1}, 1);
  ones.add({4}, 1);
  EXPECT_TRUE(split_ones(ones, {9}).second.empty());
}

TEST(ObjectiveCounts, Examples) {
  Fingerprint rest(1, {2});
  rest.add({2}, 2);
  EXPECT_NEAR(objective_counts(Histogram(1), rest, {2}), 2.0 / std::sqrt(3.0), 1e-15);
  EXPECT_EQ(objective_counts(Histogram(1), Fingerprint(1, {2}), {2}), 0.0);
  Histogram exact(1);
  exact.add({1.0}, 2.0);
  EXPECT_NEAR(objective_counts(exact, rest, {2}), 0.0, 1e-15);
}

TEST(ObjectiveLoglik, Examples) {
  Fingerprint rest(1, {2});
  rest.add({2}, 2);
  Histogram h(1);
  h.add({1.0}, 2.0);
  EXPECT_NEAR(objective_loglik(h, rest, {2}), std::log(2.0) - 2.0, 1e-14);
  EXPECT_EQ(objective_loglik(h, Fingerprint(1, {2}), {2}), 0.0);
  for (double mass : {1.5, 1.9, 2.1, 3.0}) {
    Histogram other(1);
    other.add({1.0}, mass);
    EXPECT_LT(objective_loglik(other, rest, {2}), objective_loglik(h, rest, {2}));
  }
  // The floor keeps the log finite when the histogram cannot produce the key.
  EXPECT_TRUE(std::isfinite(objective_loglik(Histogram(1), rest, {2})));
}

TEST(FitHistogram, ObjectivesReadOnlyKeysWithCountAtLeastTwo) {
  const auto model = synth::make_overlap_model(2, 60, 20);
  const Sizes n{80, 80};
  const auto fp = sample_fingerprint(model, n, 3);
  std::set<IndexVector> ones;
  for (const auto& [k, c] : fp.entries()) {
    if (c == 1) ones.insert(k);
  }
  ASSERT_FALSE(ones.empty());
  std::size_t reads = 0;
  bool bad = false;
  detail::set_key_probe([&](const IndexVector& key, std::uint64_t count) {
    ++reads;
    if (count < 2 || ones.contains(key)) bad = true;
  });
  for (auto objective : {FitObjective::counts, FitObjective::loglik}) {
    auto cfg = quick_config();
    cfg.restarts = 1;
    cfg.objective = objective;
    fit_histogram(fp, n, cfg);
  }
  objective_counts(Histogram(2), fp, n);
  detail::set_key_probe(nullptr);
  EXPECT_GT(reads, 0u);
  EXPECT_FALSE(bad);
}

TEST(FitHistogram, DeterministicForFixedConfig) {
  const auto model = synth::make_overlap_model(2, 50, 30);
  const Sizes n{60, 90};
  const auto fp = sample_fingerprint(model, n, 5);
  const auto cfg = quick_config();
  const auto a = fit_result_to_json(fit_histogram(fp, n, cfg)).dump();
  const auto b = fit_result_to_json(fit_histogram(fp, n, cfg)).dump();
  EXPECT_EQ(a, b);
}

TEST(FitHistogram, MassConstraintHolds) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto model = synth::make_overlap_model(3, 40, 15);
    const Sizes n{50, 70, 30};
    const auto fp = sample_fingerprint(model, n, seed);
    for (auto objective : {FitObjective::counts, FitObjective::loglik}) {
      auto cfg = quick_config();
      cfg.objective = objective;
      const auto r = fit_histogram(fp, n, cfg);
      EXPECT_LT(max_abs(r.diagnostics.mass_residuals), cfg.mass_tolerance);
      const auto total = r.histogram.population_mass();
      for (double v : total) EXPECT_NEAR(v, 1.0, cfg.mass_tolerance);
      EXPECT_LE(r.fitted_part.size(), r.diagnostics.support_size);
    }
  }
}

TEST(FitHistogram, ReportedObjectiveMatchesPublicObjective) {
  const auto model = synth::make_overlap_model(2, 40, 10);
  const Sizes n{100, 100};
  const auto fp = sample_fingerprint(model, n, 8);
  const auto rest = split_ones(fp, n).second;
  auto cfg = quick_config();
  const auto counts = fit_histogram(fp, n, cfg);
  EXPECT_NEAR(counts.objective_value, objective_counts(counts.fitted_part, rest, n), 1e-9);
  cfg.objective = FitObjective::loglik;
  const auto ll = fit_histogram(fp, n, cfg);
  EXPECT_NEAR(ll.objective_value, objective_loglik(ll.fitted_part, rest, n), 1e-9);
}

TEST(FitHistogram, BeatsPlantedTruth) {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 6; ++i) {
    const auto inst = test_support::make_planted(gen, 1 + i % 3, 1 + i % 3);
    FitConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    const auto r = fit_histogram(inst.fp, inst.n, cfg);
    const double truth = objective_counts(inst.truth, split_ones(inst.fp, inst.n).second, inst.n);
    EXPECT_LE(r.objective_value, truth + 1e-6) << "instance " << i;
    EXPECT_LT(max_abs(r.diagnostics.mass_residuals), cfg.mass_tolerance);
  }
}

TEST(FitHistogram, MoreRestartsNeverHurt) {
  const auto model = synth::make_overlap_model(2, 80, 40);
  const Sizes n{60, 60};
  const auto fp = sample_fingerprint(model, n, 12);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t restarts : {1u, 2u, 4u}) {
    auto cfg = quick_config();
    cfg.restarts = restarts;
    const auto r = fit_histogram(fp, n, cfg);
    EXPECT_LE(r.objective_value, prev + 1e-12);
    prev = r.objective_value;
  }
}

TEST(FitHistogram, DegenerateInputUsesResidualRule) {
  Fingerprint fp(2, {10, 20});
  fp.add({1, 0}, 1);
  fp.add({0, 3}, 1);
  fp.add({2, 1}, 1);
  const Sizes n{10, 20};
  const auto r = fit_histogram(fp, n);
  EXPECT_TRUE(r.diagnostics.degenerate);
  EXPECT_FALSE(r.diagnostics.note.empty());
  ASSERT_EQ(r.fitted_part.size(), 1u);
  const auto& e = r.fitted_part.entries().begin()->second;
  // Residuals: 1 - 0.3 = 0.7 and 1 - 0.2 = 0.8, spread over R = 20 elements.
  EXPECT_DOUBLE_EQ(e.mass, 20.0);
  EXPECT_NEAR(e.alpha[0], 0.7 / 20.0, 1e-15);
  EXPECT_NEAR(e.alpha[1], 0.8 / 20.0, 1e-15);
  EXPECT_LT(max_abs(r.diagnostics.mass_residuals), 1e-12);
}

TEST(FitHistogram, InfeasibleWhenOnesCarryTooMuchMass) {
  Fingerprint fp(1, {2});
  fp.add({2}, 1);
  fp.add({1}, 1);
  EXPECT_THROW(fit_histogram(fp, {2}), Infeasible);
}

TEST(FitHistogram, BeatsEmpiricalOnUniformPopulation) {
  std::vector<ProbVector> probs(100, ProbVector{0.01});
  std::vector<Label> labels(100);
  std::iota(labels.begin(), labels.end(), 0);
  const PopulationModel model(1, labels, probs);
  const auto truth = model.histogram();
  int wins = 0;
  for (std::uint64_t run = 0; run < 5; ++run) {
    const auto fp = sample_fingerprint(model, {1000}, 100 + run);
    FitConfig cfg;
    cfg.seed = run;
    const auto r = fit_histogram(fp, {1000}, cfg);
    if (emd(r.histogram, truth) < emd(empirical_histogram(fp, {1000}), truth)) ++wins;
  }
  EXPECT_GE(wins, 4);
}

TEST(FitConfig, ValidationAndJson) {
  FitConfig cfg;
  cfg.support_size = 7;
  cfg.objective = FitObjective::loglik;
  cfg.seed = 99;
  cfg.support_penalty = 0.25;
  const auto back = fit_config_from_json(fit_config_to_json(cfg));
  EXPECT_EQ(back.support_size, 7u);
  EXPECT_EQ(back.objective, FitObjective::loglik);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.support_penalty, 0.25);

  FitConfig bad;
  bad.mass_tolerance = 0.01;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = FitConfig{};
  bad.restarts = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(fit_config_from_json(nlohmann::json{{"objective", "l2"}}), FormatError);
  EXPECT_THROW(fit_config_from_json(nlohmann::json{{"restarts", "many"}}), FormatError);
}
