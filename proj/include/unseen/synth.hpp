#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unseen/fingerprint.hpp"
#include "unseen/histfit.hpp"
#include "unseen/histogram.hpp"
#include "unseen/linear.hpp"
#include "unseen/model.hpp"
#include "unseen/rng.hpp"

namespace unseen::synth {

enum class ModelKind { uniform, dirichlet, geometric, custom };

struct ModelSpec {
  ModelKind kind = ModelKind::uniform;
  std::size_t total_elements = 3000;
  std::size_t support_per_pop = 100;
  double dirichlet_alpha = 1.0;
  double geometric_p = 0.05;
  std::size_t m = 100;
  std::uint64_t seed = rng::kDefaultSeed;

  void validate() const;
};

/// Builds the labeled model described by `spec`. Labels are 0..total_elements-1.
/// `custom` is rejected here; construct a PopulationModel directly instead.
PopulationModel make_model(const ModelSpec& spec);

/// m populations, each uniform over `shared` common elements plus its own
/// `unique_each` private elements.
PopulationModel make_overlap_model(std::size_t m, std::size_t shared, std::size_t unique_each);

/// Four populations with a common core of geometrically weighted elements
/// and private pools of different sizes, a stand-in for cohort data where
/// populations differ in diversity.
PopulationModel make_structured_model(std::uint64_t seed);

enum class Scheme { multinomial, poissonized };

/// Multinomial: exactly n_j draws from population j. Poissonized: every
/// element's count in population j is Poisson(n_j p_xj), independently.
SampleSet draw_samples(const PopulationModel& model, const Sizes& n, Scheme scheme, rng::Engine& gen);
SampleSet draw_samples(const PopulationModel& model, const Sizes& n, Scheme scheme, std::uint64_t seed);

/// Number of labels present in `later` but absent from `earlier`.
std::uint64_t count_new(const SampleSet& earlier, const SampleSet& later);

enum class TextMode { random, contiguous };

/// Lowercased whitespace tokens with leading and trailing ASCII punctuation
/// removed; tokens that become empty are dropped.
std::vector<std::string> tokenize(std::string_view text);

struct TextSample {
  SampleSet samples;
  /// Full-text word frequencies: mass 1 at count/total for every word.
  Histogram truth;
  std::size_t total_tokens = 0;
  std::size_t total_distinct = 0;
};

/// One-population sample of `n_words` tokens, drawn without replacement at
/// random positions or as one contiguous block at a random offset.
TextSample ingest_text(std::string_view corpus, std::size_t n_words, TextMode mode, std::uint64_t seed);

enum class Estimator { unbiased, weighted };

/// Plans where a `fraction` of the m populations get factor t and the rest
/// get multiplier * t. The populations receiving the larger factor are chosen
/// once from `seed`, the same for every t.
std::vector<ExtrapolationPlan> split_plans(const Sizes& n, const std::vector<double>& t_values,
                                           double fraction, double multiplier, std::uint64_t seed);

struct GridPoint {
  double t_max = 0.0;
  std::vector<double> true_u;
  std::vector<double> estimate;
  std::vector<double> rel_err;
  double mean_true_u = 0.0;
  double mean_estimate = 0.0;
  double sd_estimate = 0.0;
  double mean_rel_err = 0.0;
};

struct ExperimentReport {
  std::size_t trials = 0;
  std::vector<GridPoint> grid;
};

/// For every trial and plan: draw period-one samples of sizes n, draw
/// period-two samples of sizes round(t_j n_j), count the true number U of new
/// distinct elements, estimate it from the period-one fingerprint and record
/// ((estimate - U) / sum_j n_j t_j)^2. The model comes from `spec`.
ExperimentReport run_extrapolation_experiment(const ModelSpec& spec, const Sizes& n,
                                              const std::vector<ExtrapolationPlan>& t_grid,
                                              std::size_t trials, Estimator estimator,
                                              std::uint64_t seed, Scheme scheme = Scheme::multinomial);
ExperimentReport run_extrapolation_experiment(const PopulationModel& model, const Sizes& n,
                                              const std::vector<ExtrapolationPlan>& t_grid,
                                              std::size_t trials, Estimator estimator,
                                              std::uint64_t seed, Scheme scheme = Scheme::multinomial);

void write_report_csv(std::ostream& out, const ExperimentReport& report);

/// Histogram recovery at several sample sizes (equal per population).
struct RecoveryRun {
  std::uint64_t size = 0;
  std::size_t run = 0;
  double emd_empirical = 0.0;
  double emd_counts = 0.0;
  double emd_loglik = 0.0;
  Histogram fitted_counts{1};
  Histogram fitted_loglik{1};
};

std::vector<RecoveryRun> run_recovery_experiment(const PopulationModel& model,
                                                 const std::vector<std::uint64_t>& sizes,
                                                 std::size_t runs, const FitConfig& cfg,
                                                 std::uint64_t seed);

struct TextRun {
  std::size_t run = 0;
  TextMode mode = TextMode::random;
  std::size_t sample_words = 0;
  std::size_t observed_distinct = 0;
  double predicted_distinct = 0.0;
  std::size_t true_distinct = 0;
};

/// Predicts the full text's distinct-word count from a sample of
/// fraction * tokens words: observed distinct plus the fitted histogram's
/// expected new distinct words in the remaining tokens.
std::vector<TextRun> run_text_experiment(std::string_view corpus, double fraction, std::size_t runs,
                                         const FitConfig& cfg, std::uint64_t seed);

}  // namespace unseen::synth
