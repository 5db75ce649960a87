#include "unseen/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "unseen/emd.hpp"
#include "unseen/histstat.hpp"
#include "unseen/numeric.hpp"
#include "unseen/parallel.hpp"

namespace unseen::synth {

namespace {

std::vector<std::size_t> random_subset(std::size_t universe, std::size_t count, rng::Engine& gen) {
  std::vector<std::size_t> all(universe);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), gen);
  all.resize(count);
  return all;
}

PopulationModel assemble(std::size_t m, std::vector<ProbVector> probs) {
  // Drop elements with zero probability everywhere and renormalize columns
  // exactly so the model validates.
  std::vector<Label> labels;
  std::vector<ProbVector> kept;
  for (std::size_t x = 0; x < probs.size(); ++x) {
    if (std::any_of(probs[x].begin(), probs[x].end(), [](double p) { return p > 0.0; })) {
      labels.push_back(x);
      kept.push_back(std::move(probs[x]));
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    numeric::CompensatedSum s;
    for (const auto& p : kept) s.add(p[j]);
    const double total = s.value();
    if (total > 0.0) {
      for (auto& p : kept) p[j] /= total;
    }
  }
  return PopulationModel(m, std::move(labels), std::move(kept));
}

double stddev(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  return std::sqrt(numeric::pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : numeric::pairwise_sum(v) / static_cast<double>(v.size());
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

}  // namespace

void ModelSpec::validate() const {
  if (m == 0) throw std::invalid_argument("ModelSpec: m must be >= 1");
  if (total_elements == 0) throw std::invalid_argument("ModelSpec: total_elements must be >= 1");
  if (support_per_pop == 0 || support_per_pop > total_elements) {
    throw std::invalid_argument("ModelSpec: support_per_pop must be in [1, total_elements]");
  }
  if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("ModelSpec: dirichlet_alpha must be > 0");
  if (!(geometric_p > 0.0 && geometric_p < 1.0)) {
    throw std::invalid_argument("ModelSpec: geometric_p must be in (0, 1)");
  }
}

PopulationModel make_model(const ModelSpec& spec) {
  spec.validate();
  if (spec.kind == ModelKind::custom) {
    throw std::invalid_argument("make_model: custom models are built directly as PopulationModel");
  }
  std::vector<ProbVector> probs(spec.total_elements, ProbVector(spec.m, 0.0));
  for (std::size_t j = 0; j < spec.m; ++j) {
    auto gen = rng::stream(spec.seed, {0x6d6f64656cu, j});
    switch (spec.kind) {
      case ModelKind::uniform: {
        const double p = 1.0 / static_cast<double>(spec.support_per_pop);
        for (std::size_t x : random_subset(spec.total_elements, spec.support_per_pop, gen)) probs[x][j] = p;
        break;
      }
      case ModelKind::dirichlet: {
        std::gamma_distribution<double> gamma(spec.dirichlet_alpha, 1.0);
        const auto support = random_subset(spec.total_elements, spec.support_per_pop, gen);
        std::vector<double> w(support.size());
        for (double& v : w) v = gamma(gen);
        const double total = numeric::pairwise_sum(w);
        for (std::size_t k = 0; k < support.size(); ++k) probs[support[k]][j] = w[k] / total;
        break;
      }
      case ModelKind::geometric: {
        const auto order = random_subset(spec.total_elements, spec.total_elements, gen);
        std::vector<double> w(order.size());
        const double log_q = std::log1p(-spec.geometric_p);
        for (std::size_t k = 0; k < order.size(); ++k) {
          w[k] = std::exp(static_cast<double>(k + 1) * log_q) * spec.geometric_p;
        }
        const double total = numeric::pairwise_sum(w);
        for (std::size_t k = 0; k < order.size(); ++k) probs[order[k]][j] = w[k] / total;
        break;
      }
      case ModelKind::custom:
        break;
    }
  }
  return assemble(spec.m, std::move(probs));
}

PopulationModel make_overlap_model(std::size_t m, std::size_t shared, std::size_t unique_each) {
  if (m == 0 || shared + unique_each == 0) throw std::invalid_argument("make_overlap_model: empty model");
  const std::size_t total = shared + m * unique_each;
  const double p = 1.0 / static_cast<double>(shared + unique_each);
  std::vector<ProbVector> probs(total, ProbVector(m, 0.0));
  for (std::size_t x = 0; x < shared; ++x) std::fill(probs[x].begin(), probs[x].end(), p);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t u = 0; u < unique_each; ++u) probs[shared + j * unique_each + u][j] = p;
  }
  std::vector<Label> labels(total);
  std::iota(labels.begin(), labels.end(), Label{0});
  return PopulationModel(m, std::move(labels), std::move(probs));
}

PopulationModel make_structured_model(std::uint64_t seed) {
  constexpr std::size_t m = 4;
  constexpr std::size_t core = 400;
  const std::size_t pools[m] = {6000, 2500, 1500, 800};
  const double core_share[m] = {0.55, 0.7, 0.75, 0.8};
  auto gen = rng::stream(seed, {0x73747275u});
  std::size_t total = core;
  for (std::size_t pool : pools) total += pool;
  std::vector<ProbVector> probs(total, ProbVector(m, 0.0));

  // Core: geometric weights over a population-specific order of the shared
  // elements, so common elements are common everywhere but not identically.
  std::vector<double> base(core);
  for (std::size_t k = 0; k < core; ++k) base[k] = std::pow(0.99, static_cast<double>(k));
  std::lognormal_distribution<double> jitter(0.0, 0.5);
  std::size_t offset = core;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> w(core);
    for (std::size_t k = 0; k < core; ++k) w[k] = base[k] * jitter(gen);
    const double wsum = numeric::pairwise_sum(w);
    for (std::size_t k = 0; k < core; ++k) probs[k][j] = core_share[j] * w[k] / wsum;
    // Private pool: Dirichlet(0.5) weights, a long tail of rare elements.
    std::gamma_distribution<double> gamma(0.5, 1.0);
    std::vector<double> v(pools[j]);
    for (double& x : v) x = gamma(gen);
    const double vsum = numeric::pairwise_sum(v);
    for (std::size_t k = 0; k < pools[j]; ++k) probs[offset + k][j] = (1.0 - core_share[j]) * v[k] / vsum;
    offset += pools[j];
  }
  return assemble(m, std::move(probs));
}

SampleSet draw_samples(const PopulationModel& model, const Sizes& n, Scheme scheme, rng::Engine& gen) {
  require_same_m(n.size(), model.m(), "draw_samples");
  SampleSet out(model.m());
  const auto& probs = model.probs();
  const auto& labels = model.labels();
  for (std::size_t j = 0; j < model.m(); ++j) {
    if (n[j] == 0) continue;
    if (scheme == Scheme::poissonized) {
      for (std::size_t x = 0; x < probs.size(); ++x) {
        const double p = probs[x][j];
        if (p <= 0.0) continue;
        std::poisson_distribution<std::uint64_t> pois(static_cast<double>(n[j]) * p);
        const auto c = pois(gen);
        if (c > 0) out.add(j, labels[x], static_cast<std::uint32_t>(c));
      }
      continue;
    }
    // Multinomial as a chain of conditional binomials.
    std::uint64_t remaining = n[j];
    double mass_left = 1.0;
    for (std::size_t x = 0; x < probs.size() && remaining > 0; ++x) {
      const double p = probs[x][j];
      if (p <= 0.0) continue;
      const double q = mass_left > 0.0 ? std::min(1.0, p / mass_left) : 1.0;
      std::uint64_t c = remaining;
      if (q < 1.0) {
        std::binomial_distribution<std::uint64_t> bin(remaining, q);
        c = bin(gen);
      }
      mass_left -= p;
      if (c > 0) {
        out.add(j, labels[x], static_cast<std::uint32_t>(c));
        remaining -= c;
      }
    }
    if (remaining > 0) {
      // Rounding left mass on the table; give it to the last supported element.
      for (std::size_t x = probs.size(); x-- > 0;) {
        if (probs[x][j] > 0.0) {
          out.add(j, labels[x], static_cast<std::uint32_t>(remaining));
          break;
        }
      }
    }
  }
  return out;
}

SampleSet draw_samples(const PopulationModel& model, const Sizes& n, Scheme scheme, std::uint64_t seed) {
  auto gen = rng::stream(seed);
  return draw_samples(model, n, scheme, gen);
}

std::uint64_t count_new(const SampleSet& earlier, const SampleSet& later) {
  std::uint64_t fresh = 0;
  for (const auto& [label, counts] : later.counts()) {
    if (!earlier.counts().contains(label)) ++fresh;
  }
  return fresh;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t a = i;
    std::size_t b = j;
    while (a < b && is_ascii_punct(text[a])) ++a;
    while (b > a && is_ascii_punct(text[b - 1])) --b;
    if (a < b) {
      std::string tok(text.substr(a, b - a));
      for (char& c : tok) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 128) c = static_cast<char>(std::tolower(u));
      }
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

TextSample ingest_text(std::string_view corpus, std::size_t n_words, TextMode mode, std::uint64_t seed) {
  if (n_words == 0) throw std::invalid_argument("ingest_text: n_words must be >= 1");
  const auto tokens = tokenize(corpus);
  if (tokens.size() < n_words) {
    throw std::invalid_argument("ingest_text: corpus has " + std::to_string(tokens.size()) +
                                " words, fewer than " + std::to_string(n_words));
  }
  std::unordered_map<std::string, Label> ids;
  std::vector<Label> token_ids(tokens.size());
  std::vector<std::uint64_t> freq;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(tokens[i], ids.size());
    if (inserted) freq.push_back(0);
    token_ids[i] = it->second;
    ++freq[it->second];
  }

  auto gen = rng::stream(seed, {0x74657874u});
  std::vector<std::size_t> positions;
  if (mode == TextMode::random) {
    positions = random_subset(tokens.size(), n_words, gen);
  } else {
    std::uniform_int_distribution<std::size_t> start(0, tokens.size() - n_words);
    const std::size_t s = start(gen);
    positions.resize(n_words);
    std::iota(positions.begin(), positions.end(), s);
  }

  TextSample out{SampleSet(1), Histogram(1), tokens.size(), ids.size()};
  for (std::size_t pos : positions) out.samples.add(0, token_ids[pos]);
  const double total = static_cast<double>(tokens.size());
  for (std::uint64_t f : freq) out.truth.add({static_cast<double>(f) / total}, 1.0);
  return out;
}

std::vector<ExtrapolationPlan> split_plans(const Sizes& n, const std::vector<double>& t_values,
                                           double fraction, double multiplier, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("split_plans: fraction must be in [0,1]");
  const std::size_t m = n.size();
  const auto small = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  auto gen = rng::stream(seed, {0x73706c6974u});
  const auto order = random_subset(m, m, gen);
  std::vector<bool> boosted(m, false);
  for (std::size_t k = small; k < m; ++k) boosted[order[k]] = true;
  std::vector<ExtrapolationPlan> plans;
  for (double t : t_values) {
    std::vector<double> f(m);
    for (std::size_t j = 0; j < m; ++j) f[j] = boosted[j] ? multiplier * t : t;
    plans.emplace_back(std::move(f), n);
  }
  return plans;
}

ExperimentReport run_extrapolation_experiment(const ModelSpec& spec, const Sizes& n,
                                              const std::vector<ExtrapolationPlan>& t_grid,
                                              std::size_t trials, Estimator estimator,
                                              std::uint64_t seed, Scheme scheme) {
  return run_extrapolation_experiment(make_model(spec), n, t_grid, trials, estimator, seed, scheme);
}

ExperimentReport run_extrapolation_experiment(const PopulationModel& model, const Sizes& n,
                                              const std::vector<ExtrapolationPlan>& t_grid,
                                              std::size_t trials, Estimator estimator,
                                              std::uint64_t seed, Scheme scheme) {
  require_same_m(n.size(), model.m(), "run_extrapolation_experiment");
  for (const auto& plan : t_grid) {
    require_same_m(plan.m(), model.m(), "run_extrapolation_experiment");
    if (plan.n != n) throw std::invalid_argument("run_extrapolation_experiment: plan sizes differ from n");
  }
  const std::size_t g = t_grid.size();
  std::vector<double> truth(trials * g);
  std::vector<double> est(trials * g);
  parallel_for(trials, [&](std::size_t trial) {
    auto gen = rng::stream(seed, {0x747269616cu, trial});
    const SampleSet first = draw_samples(model, n, scheme, gen);
    const Fingerprint fp = build_fingerprint(first);
    for (std::size_t k = 0; k < g; ++k) {
      auto gen2 = rng::stream(seed, {0x7365636fu, trial, k});
      const SampleSet second = draw_samples(model, t_grid[k].new_counts(), scheme, gen2);
      truth[trial * g + k] = static_cast<double>(count_new(first, second));
      est[trial * g + k] = estimator == Estimator::unbiased ? unbiased_estimate(fp, t_grid[k])
                                                            : weighted_estimate(fp, t_grid[k]);
    }
  });

  ExperimentReport report;
  report.trials = trials;
  for (std::size_t k = 0; k < g; ++k) {
    GridPoint pt;
    pt.t_max = t_grid[k].max_factor();
    const double scale = t_grid[k].period_two_total();
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const double u = truth[trial * g + k];
      const double e = est[trial * g + k];
      pt.true_u.push_back(u);
      pt.estimate.push_back(e);
      pt.rel_err.push_back(scale > 0.0 ? ((e - u) / scale) * ((e - u) / scale) : 0.0);
    }
    pt.mean_true_u = mean_of(pt.true_u);
    pt.mean_estimate = mean_of(pt.estimate);
    pt.sd_estimate = stddev(pt.estimate, pt.mean_estimate);
    pt.mean_rel_err = mean_of(pt.rel_err);
    report.grid.push_back(std::move(pt));
  }
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "t_max,mean_true_U,mean_estimate,sd_estimate,mean_rel_err\n";
  out.precision(10);
  for (const auto& pt : report.grid) {
    out << pt.t_max << ',' << pt.mean_true_u << ',' << pt.mean_estimate << ',' << pt.sd_estimate << ','
        << pt.mean_rel_err << '\n';
  }
}

std::vector<RecoveryRun> run_recovery_experiment(const PopulationModel& model,
                                                 const std::vector<std::uint64_t>& sizes,
                                                 std::size_t runs, const FitConfig& cfg,
                                                 std::uint64_t seed) {
  const Histogram truth = model.histogram();
  std::vector<RecoveryRun> out;
  for (std::size_t r = 0; r < runs; ++r) {
    for (std::uint64_t size : sizes) {
      const Sizes n(model.m(), size);
      auto gen = rng::stream(seed, {0x7265636fu, r, size});
      const Fingerprint fp = build_fingerprint(draw_samples(model, n, Scheme::multinomial, gen));
      RecoveryRun row;
      row.size = size;
      row.run = r;
      row.emd_empirical = emd(empirical_histogram(fp, n), truth);
      FitConfig c = cfg;
      c.seed = rng::derive(cfg.seed, {r, size});
      c.objective = FitObjective::counts;
      row.fitted_counts = fit_histogram(fp, n, c).histogram;
      c.objective = FitObjective::loglik;
      row.fitted_loglik = fit_histogram(fp, n, c).histogram;
      row.emd_counts = emd(row.fitted_counts, truth);
      row.emd_loglik = emd(row.fitted_loglik, truth);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::vector<TextRun> run_text_experiment(std::string_view corpus, double fraction, std::size_t runs,
                                         const FitConfig& cfg, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("run_text_experiment: fraction must be in (0,1]");
  const std::size_t total = tokenize(corpus).size();
  const auto words = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total))));
  std::vector<TextRun> out;
  for (std::size_t r = 0; r < runs; ++r) {
    for (TextMode mode : {TextMode::random, TextMode::contiguous}) {
      const auto sample = ingest_text(corpus, words, mode, rng::derive(seed, {r}));
      const Fingerprint fp = build_fingerprint(sample.samples);
      const Sizes n{words};
      FitConfig c = cfg;
      c.seed = rng::derive(cfg.seed, {r});
      const auto fit = fit_histogram(fp, n, c);
      TextRun row;
      row.run = r;
      row.mode = mode;
      row.sample_words = words;
      row.observed_distinct = sample.samples.distinct();
      row.predicted_distinct = static_cast<double>(row.observed_distinct) +
                               expected_new_distinct(fit.histogram, n, Sizes{total - words});
      row.true_distinct = sample.total_distinct;
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace unseen::synth
