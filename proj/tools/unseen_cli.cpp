#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "unseen/alloc.hpp"
#include "unseen/emd.hpp"
#include "unseen/fingerprint.hpp"
#include "unseen/histfit.hpp"
#include "unseen/histstat.hpp"
#include "unseen/io.hpp"
#include "unseen/linear.hpp"
#include "unseen/synth.hpp"

using namespace unseen;
using nlohmann::json;

namespace {

constexpr int kExitMalformed = 1;
constexpr int kExitInfeasible = 2;

// Opens `path` for reading; "-" means standard input.
class Input {
public:
  explicit Input(const std::string& path) {
    if (path == "-") return;
    file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file_) throw FormatError("cannot open '" + path + "' for reading");
  }
  std::istream& get() { return file_ ? *file_ : std::cin; }

private:
  std::unique_ptr<std::ifstream> file_;
};

class Output {
public:
  explicit Output(const std::string& path) {
    if (path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw FormatError("cannot open '" + path + "' for writing");
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

std::string read_all(const std::string& path) {
  Input in(path);
  std::ostringstream buf;
  buf << in.get().rdbuf();
  return buf.str();
}

// Broadcasts a single value to all m populations.
template <typename T>
std::vector<T> per_population(std::vector<T> values, std::size_t m, const char* what) {
  if (values.size() == 1 && m > 1) values.assign(m, values.front());
  if (values.size() != m) {
    throw DimensionMismatch(std::string(what) + ": expected 1 or " + std::to_string(m) + " values, got " +
                            std::to_string(values.size()));
  }
  return values;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string join(const Sizes& v, char sep = ';') {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) out += (j ? std::string(1, sep) : "") + std::to_string(v[j]);
  return out;
}

enum class Format { csv, json };

void emit_table(std::ostream& out, Format format, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  if (format == Format::csv) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
      out << '\n';
    }
    return;
  }
  json arr = json::array();
  for (const auto& row : rows) {
    json obj;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string& cell = row[c];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (!cell.empty() && end && *end == '\0') {
        obj[header[c]] = v;
      } else {
        obj[header[c]] = cell;
      }
    }
    arr.push_back(obj);
  }
  out << arr.dump(2) << '\n';
}

FitObjective parse_objective(const std::string& s) {
  if (s == "counts") return FitObjective::counts;
  if (s == "loglik") return FitObjective::loglik;
  throw FormatError("objective must be 'counts' or 'loglik'");
}

// ---------------------------------------------------------------------------
// Presets

struct PresetOptions {
  std::uint64_t seed = rng::kDefaultSeed;
  std::size_t trials = 100;
  std::size_t runs = 0;
  std::string corpus;
  Format format = Format::csv;
};

// Fits used for the multi-population recovery presets favour small supports.
FitConfig recovery_fit_config(std::uint64_t seed) {
  FitConfig cfg;
  cfg.seed = seed;
  cfg.support_penalty = 0.03;
  return cfg;
}

void preset_extrapolation(std::ostream& out, synth::ModelKind kind, const PresetOptions& opt) {
  synth::ModelSpec spec;
  spec.kind = kind;
  spec.seed = opt.seed;
  const Sizes n(spec.m, 10);
  std::vector<double> t_values;
  for (int k = 1; k <= 10; ++k) t_values.push_back(0.1 * k);
  const auto plans = synth::split_plans(n, t_values, 0.95, 10.0, rng::derive(opt.seed, {1}));
  const auto report = synth::run_extrapolation_experiment(spec, n, plans, opt.trials, synth::Estimator::weighted,
                                                          rng::derive(opt.seed, {2}));
  if (opt.format == Format::csv) {
    synth::write_report_csv(out, report);
    return;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& g : report.grid) {
    rows.push_back({fmt(g.t_max), fmt(g.mean_true_u), fmt(g.mean_estimate), fmt(g.sd_estimate), fmt(g.mean_rel_err)});
  }
  emit_table(out, opt.format, {"t_max", "mean_true_U", "mean_estimate", "sd_estimate", "mean_rel_err"}, rows);
}

PopulationModel overlap_preset_model() { return synth::make_overlap_model(3, 1000, 333); }

void preset_recovery(std::ostream& out, const PresetOptions& opt) {
  const auto model = overlap_preset_model();
  const std::size_t runs = opt.runs ? opt.runs : 5;
  const auto result =
      synth::run_recovery_experiment(model, {250, 500, 1000, 2000}, runs, recovery_fit_config(opt.seed), opt.seed);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : result) {
    rows.push_back({std::to_string(r.size), std::to_string(r.run), fmt(r.emd_empirical), fmt(r.emd_counts),
                    fmt(r.emd_loglik)});
  }
  emit_table(out, opt.format, {"size", "run", "emd_empirical", "emd_counts", "emd_loglik"}, rows);
}

void preset_new_elements(std::ostream& out, const PresetOptions& opt) {
  const auto model = overlap_preset_model();
  const auto truth = model.histogram();
  const std::uint64_t size = 2000;
  const std::size_t runs = opt.runs ? opt.runs : 5;
  const auto result = synth::run_recovery_experiment(model, {size}, runs, recovery_fit_config(opt.seed), opt.seed);
  const Sizes n_old(3, size);
  const std::vector<std::pair<std::string, std::vector<double>>> scenarios = {
      {"equal", {1.0 / 3, 1.0 / 3, 1.0 / 3}}, {"skewed", {10.0 / 12, 1.0 / 12, 1.0 / 12}}};
  std::vector<std::uint64_t> totals;
  for (int k = 1; k <= 8; ++k) totals.push_back(static_cast<std::uint64_t>(k) * 1500);

  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, ratio] : scenarios) {
    for (const auto& b : alloc::ratio_schedule(ratio, totals)) {
      const double true_gain = expected_new_distinct(truth, n_old, b);
      for (const auto& r : result) {
        rows.push_back({name, std::to_string(std::accumulate(b.begin(), b.end(), std::uint64_t{0})), join(b),
                        std::to_string(r.run), fmt(true_gain), fmt(expected_new_distinct(r.fitted_counts, n_old, b)),
                        fmt(expected_new_distinct(r.fitted_loglik, n_old, b))});
      }
    }
  }
  emit_table(out, opt.format, {"scenario", "total", "b", "run", "true", "pred_counts", "pred_loglik"}, rows);
}

void preset_text(std::ostream& out, const PresetOptions& opt) {
  if (opt.corpus.empty()) throw FormatError("preset fig2a needs --corpus <text file>");
  const std::string corpus = read_all(opt.corpus);
  FitConfig cfg;
  cfg.seed = opt.seed;
  const auto runs = synth::run_text_experiment(corpus, 0.25, opt.runs ? opt.runs : 10, cfg, opt.seed);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : runs) {
    const double rel = (r.predicted_distinct - static_cast<double>(r.true_distinct)) / static_cast<double>(r.true_distinct);
    rows.push_back({std::to_string(r.run), r.mode == synth::TextMode::random ? "random" : "contiguous",
                    std::to_string(r.sample_words), std::to_string(r.observed_distinct), fmt(r.predicted_distinct),
                    std::to_string(r.true_distinct), fmt(rel)});
  }
  emit_table(out, opt.format, {"run", "mode", "sample_words", "observed", "predicted", "true", "rel_err"}, rows);
}

void preset_allocation(std::ostream& out, const PresetOptions& opt) {
  const auto model = synth::make_structured_model(opt.seed);
  const auto truth = model.histogram();
  const Sizes n_old(model.m(), 500);
  const auto samples = synth::draw_samples(model, n_old, synth::Scheme::multinomial, rng::derive(opt.seed, {3}));
  const auto fit = fit_histogram(build_fingerprint(samples), n_old, recovery_fit_config(opt.seed));

  std::vector<std::uint64_t> totals;
  for (int k = 1; k <= 10; ++k) totals.push_back(static_cast<std::uint64_t>(k) * 2000);
  std::vector<std::pair<std::string, std::vector<Sizes>>> scenarios;
  scenarios.emplace_back("even", alloc::ratio_schedule({1, 1, 1, 1}, totals));
  for (std::size_t j = 0; j < model.m(); ++j) {
    std::vector<double> ratio(model.m(), 0.0);
    ratio[j] = 1.0;
    scenarios.emplace_back("only_" + std::to_string(j), alloc::ratio_schedule(ratio, totals));
  }
  std::vector<Sizes> optimized;
  for (auto total : totals) {
    alloc::AllocationProblem p{fit.histogram, n_old, total, 0};
    optimized.push_back(alloc::optimize_allocation(p).b);
  }
  scenarios.emplace_back("optimized", std::move(optimized));

  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, schedule] : scenarios) {
    for (const auto& b : schedule) {
      rows.push_back({name, std::to_string(std::accumulate(b.begin(), b.end(), std::uint64_t{0})), join(b),
                      fmt(expected_new_distinct(fit.histogram, n_old, b)), fmt(expected_new_distinct(truth, n_old, b))});
    }
  }
  emit_table(out, opt.format, {"scenario", "total", "b", "predicted", "true"}, rows);
}

void preset_seen_twice(std::ostream& out, const PresetOptions& opt) {
  const auto model = overlap_preset_model();
  const auto truth = model.histogram();
  const Sizes n_old(3, 500);
  const auto samples = synth::draw_samples(model, n_old, synth::Scheme::multinomial, rng::derive(opt.seed, {4}));
  const auto fit = fit_histogram(build_fingerprint(samples), n_old, recovery_fit_config(opt.seed));
  std::vector<std::vector<std::string>> rows;
  for (int k = 1; k <= 10; ++k) {
    const Sizes b(3, static_cast<std::uint64_t>(k) * 500);
    rows.push_back({std::to_string(k), fmt(expected_new_distinct(truth, n_old, b)),
                    fmt(expected_new_seen_at_least(truth, n_old, b, 2)), fmt(expected_new_distinct(fit.histogram, n_old, b)),
                    fmt(expected_new_seen_at_least(fit.histogram, n_old, b, 2))});
  }
  emit_table(out, opt.format, {"t", "true_new", "true_new_seen2", "pred_new", "pred_new_seen2"}, rows);
}

// ---------------------------------------------------------------------------

struct Common {
  std::uint64_t seed = rng::kDefaultSeed;
  std::string output = "-";
  std::string format = "csv";

  Format parsed_format() const { return format == "json" ? Format::json : Format::csv; }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("-o,--output", c.output, "Output path, - for stdout")->capture_default_str();
}

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-population unseen-element estimation"};
  app.require_subcommand(1);
  Common common;

  // fingerprint
  auto* c_fp = app.add_subcommand("fingerprint", "Sample TSV to fingerprint TSV");
  std::string fp_input = "-";
  std::size_t fp_m = 0;
  c_fp->add_option("-i,--input", fp_input, "Sample TSV (population_index<TAB>label)")->capture_default_str();
  c_fp->add_option("--m", fp_m, "Population count (0 infers it)")->capture_default_str();
  add_common(c_fp, common);

  // estimate
  auto* c_est = app.add_subcommand("estimate", "Unbiased and Poisson-weighted estimates of new elements");
  std::string est_input = "-", est_t, est_rate = "auto";
  c_est->add_option("-i,--input", est_input, "Fingerprint TSV")->capture_default_str();
  c_est->add_option("--t", est_t, "Extrapolation factors, one or m comma-separated values")->required();
  c_est->add_option("--rate", est_rate, "Poisson rate, or auto")->capture_default_str();
  add_common(c_est, common);
  add_format(c_est, common);

  // fit
  auto* c_fit = app.add_subcommand("fit", "Fit a histogram to a fingerprint");
  std::string fit_input = "-", fit_config, fit_objective;
  std::size_t fit_support = 0, fit_restarts = 0, fit_max_evals = 0;
  double fit_support_penalty = -1.0;
  c_fit->add_option("-i,--input", fit_input, "Fingerprint TSV")->capture_default_str();
  c_fit->add_option("--config", fit_config, "FitConfig JSON file");
  c_fit->add_option("--objective", fit_objective, "counts or loglik");
  c_fit->add_option("--support-size", fit_support, "Fitted support points (0 = automatic)");
  c_fit->add_option("--restarts", fit_restarts, "Random restarts");
  c_fit->add_option("--max-evals", fit_max_evals, "Evaluation budget per restart");
  c_fit->add_option("--support-penalty", fit_support_penalty, "Per-element loss penalty");
  add_common(c_fit, common);

  // stats
  auto* c_stats = app.add_subcommand("stats", "Statistics of a histogram");
  std::string st_hist, st_n, st_b, st_compare;
  c_stats->add_option("--histogram", st_hist, "Histogram JSON")->required();
  c_stats->add_option("--n", st_n, "Period-one sizes")->required();
  c_stats->add_option("--b", st_b, "Additional samples per population");
  c_stats->add_option("--compare", st_compare, "Second histogram for the earthmover distance");
  add_common(c_stats, common);
  add_format(c_stats, common);

  // allocate
  auto* c_alloc = app.add_subcommand("allocate", "Split a sampling budget across populations");
  std::string al_hist, al_n, al_objective = "distinct";
  std::uint64_t al_budget = 0, al_step = 0;
  c_alloc->add_option("--histogram", al_hist, "Histogram JSON")->required();
  c_alloc->add_option("--n", al_n, "Current sample sizes")->required();
  c_alloc->add_option("--budget", al_budget, "Total new samples")->required();
  c_alloc->add_option("--step", al_step, "Allocation granularity (0 = budget/1000)")->capture_default_str();
  c_alloc->add_option("--objective", al_objective, "distinct or seen2")
      ->check(CLI::IsMember({"distinct", "seen2"}))
      ->capture_default_str();
  add_common(c_alloc, common);

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "Draw samples from a synthetic model");
  std::string sim_model = "uniform", sim_n = "10", sim_scheme = "multinomial";
  synth::ModelSpec sim_spec;
  std::size_t sim_shared = 1000, sim_unique = 333, sim_m_overlap = 3;
  c_sim->add_option("--model", sim_model, "uniform, dirichlet, geometric, overlap or structured")
      ->check(CLI::IsMember({"uniform", "dirichlet", "geometric", "overlap", "structured"}))
      ->capture_default_str();
  c_sim->add_option("--m", sim_spec.m, "Populations")->capture_default_str();
  c_sim->add_option("--total-elements", sim_spec.total_elements, "Domain size")->capture_default_str();
  c_sim->add_option("--support", sim_spec.support_per_pop, "Support per population")->capture_default_str();
  c_sim->add_option("--alpha", sim_spec.dirichlet_alpha, "Dirichlet concentration")->capture_default_str();
  c_sim->add_option("--p", sim_spec.geometric_p, "Geometric parameter")->capture_default_str();
  c_sim->add_option("--shared", sim_shared, "Overlap model: shared elements")->capture_default_str();
  c_sim->add_option("--unique", sim_unique, "Overlap model: private elements per population")->capture_default_str();
  c_sim->add_option("--overlap-m", sim_m_overlap, "Overlap model: populations")->capture_default_str();
  c_sim->add_option("--n", sim_n, "Sample sizes, one or m values")->capture_default_str();
  c_sim->add_option("--scheme", sim_scheme, "multinomial or poissonized")
      ->check(CLI::IsMember({"multinomial", "poissonized"}))
      ->capture_default_str();
  add_common(c_sim, common);

  // ingest-text
  auto* c_text = app.add_subcommand("ingest-text", "Sample words from a text corpus");
  std::string tx_corpus, tx_mode = "random", tx_truth;
  std::size_t tx_words = 0;
  double tx_fraction = 0.25;
  c_text->add_option("--corpus", tx_corpus, "UTF-8 text file")->required();
  c_text->add_option("--words", tx_words, "Sample size in tokens (overrides --fraction)");
  c_text->add_option("--fraction", tx_fraction, "Sample size as a fraction of the tokens")->capture_default_str();
  c_text->add_option("--mode", tx_mode, "random or contiguous")
      ->check(CLI::IsMember({"random", "contiguous"}))
      ->capture_default_str();
  c_text->add_option("--truth", tx_truth, "Write the full-text histogram JSON here");
  add_common(c_text, common);

  // experiment
  auto* c_exp = app.add_subcommand("experiment", "Reproduce an experiment preset");
  std::string ex_preset;
  PresetOptions ex_opt;
  c_exp->add_option("--preset", ex_preset, "Preset name")
      ->required()
      ->check(CLI::IsMember({"fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig2a", "fig2b", "fig5"}));
  c_exp->add_option("--trials", ex_opt.trials, "Trials (fig1a-c)")->capture_default_str();
  c_exp->add_option("--runs", ex_opt.runs, "Runs (fig1d, fig1e, fig2a; 0 = preset default)");
  c_exp->add_option("--corpus", ex_opt.corpus, "Text corpus (fig2a)");
  add_common(c_exp, common);
  add_format(c_exp, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitMalformed;
  }

  try {
    Output out(common.output);
    std::ostream& os = out.get();
    os << std::setprecision(17);

    if (*c_fp) {
      Input in(fp_input);
      io::LabelTable labels;
      const auto samples = io::read_samples_tsv(in.get(), labels, fp_m);
      io::write_fingerprint_tsv(os, build_fingerprint(samples));
    } else if (*c_est) {
      Input in(est_input);
      const auto fp = io::read_fingerprint_tsv(in.get());
      const auto t = per_population(io::parse_real_list(est_t), fp.m(), "--t");
      const ExtrapolationPlan plan(t, fp.dims());
      WeightConfig wc;
      if (est_rate != "auto") wc.rate = io::parse_real_list(est_rate).at(0);
      const auto rate = resolve_rate(plan, wc);
      const double u = unbiased_estimate(fp, plan);
      const double w = weighted_estimate(fp, plan, wc);
      emit_table(os, common.parsed_format(), {"unbiased", "weighted", "rate"},
                 {{fmt(u), fmt(w), rate ? fmt(*rate) : std::string("none")}});
    } else if (*c_fit) {
      Input in(fit_input);
      const auto fp = io::read_fingerprint_tsv(in.get());
      FitConfig cfg;
      if (!fit_config.empty()) {
        json j;
        try {
          j = json::parse(read_all(fit_config));
        } catch (const json::exception& e) {
          throw FormatError(std::string("config: ") + e.what());
        }
        cfg = fit_config_from_json(j);
      }
      if (c_fit->count("--seed")) cfg.seed = common.seed;
      if (!fit_objective.empty()) cfg.objective = parse_objective(fit_objective);
      if (c_fit->count("--support-size")) cfg.support_size = fit_support;
      if (c_fit->count("--restarts")) cfg.restarts = fit_restarts;
      if (c_fit->count("--max-evals")) cfg.max_evals = fit_max_evals;
      if (c_fit->count("--support-penalty")) cfg.support_penalty = fit_support_penalty;
      cfg.validate();
      const auto result = fit_histogram(fp, fp.dims(), cfg);
      os << fit_result_to_json(result).dump(2) << '\n';
    } else if (*c_stats) {
      Input in(st_hist);
      const auto h = io::read_histogram_json(in.get());
      const auto n = per_population(io::parse_size_list(st_n), h.m(), "--n");
      std::vector<std::string> header{"expected_distinct"};
      std::vector<std::string> row{fmt(expected_distinct(h, n))};
      if (!st_b.empty()) {
        const auto b = per_population(io::parse_size_list(st_b), h.m(), "--b");
        header.insert(header.end(), {"expected_new_distinct", "expected_new_seen_at_least_2"});
        row.insert(row.end(), {fmt(expected_new_distinct(h, n, b)), fmt(expected_new_seen_at_least(h, n, b, 2))});
      }
      if (!st_compare.empty()) {
        Input other(st_compare);
        header.push_back("emd");
        row.push_back(fmt(emd(h, io::read_histogram_json(other.get()))));
      }
      emit_table(os, common.parsed_format(), header, {row});
    } else if (*c_alloc) {
      Input in(al_hist);
      alloc::AllocationProblem p;
      p.h = io::read_histogram_json(in.get());
      p.n_old = per_population(io::parse_size_list(al_n), p.h.m(), "--n");
      p.budget = al_budget;
      p.step = al_step;
      const auto objective = al_objective == "seen2" ? alloc::Objective::seen_at_least_2 : alloc::Objective::distinct;
      const auto r = alloc::optimize_allocation(p, objective);
      json j{{"b", r.b},
             {"predicted_gain", r.predicted_gain},
             {"baseline_gains", r.baseline_gains},
             {"heuristic", r.heuristic},
             {"exhaustive_checked", r.exhaustive_checked},
             {"step", p.effective_step()}};
      os << j.dump(2) << '\n';
    } else if (*c_sim) {
      std::unique_ptr<PopulationModel> model;
      sim_spec.seed = common.seed;
      if (sim_model == "overlap") {
        model = std::make_unique<PopulationModel>(synth::make_overlap_model(sim_m_overlap, sim_shared, sim_unique));
      } else if (sim_model == "structured") {
        model = std::make_unique<PopulationModel>(synth::make_structured_model(common.seed));
      } else {
        sim_spec.kind = sim_model == "uniform"     ? synth::ModelKind::uniform
                        : sim_model == "dirichlet" ? synth::ModelKind::dirichlet
                                                   : synth::ModelKind::geometric;
        model = std::make_unique<PopulationModel>(synth::make_model(sim_spec));
      }
      const auto n = per_population(io::parse_size_list(sim_n), model->m(), "--n");
      const auto scheme = sim_scheme == "poissonized" ? synth::Scheme::poissonized : synth::Scheme::multinomial;
      const auto samples = synth::draw_samples(*model, n, scheme, rng::derive(common.seed, {0x73696d}));
      io::write_samples_tsv(os, samples, nullptr);
    } else if (*c_text) {
      const std::string corpus = read_all(tx_corpus);
      std::size_t words = tx_words;
      if (!c_text->count("--words")) {
        if (!(tx_fraction > 0.0 && tx_fraction <= 1.0)) throw FormatError("--fraction must be in (0, 1]");
        words = static_cast<std::size_t>(std::llround(tx_fraction * static_cast<double>(synth::tokenize(corpus).size())));
      }
      const auto mode = tx_mode == "contiguous" ? synth::TextMode::contiguous : synth::TextMode::random;
      const auto sample = synth::ingest_text(corpus, words, mode, common.seed);
      io::write_samples_tsv(os, sample.samples, nullptr);
      if (!tx_truth.empty()) {
        Output truth(tx_truth);
        io::write_histogram_json(truth.get(), sample.truth);
      }
    } else if (*c_exp) {
      ex_opt.seed = common.seed;
      ex_opt.format = common.parsed_format();
      if (ex_preset == "fig1a") {
        preset_extrapolation(os, synth::ModelKind::uniform, ex_opt);
      } else if (ex_preset == "fig1b") {
        preset_extrapolation(os, synth::ModelKind::dirichlet, ex_opt);
      } else if (ex_preset == "fig1c") {
        preset_extrapolation(os, synth::ModelKind::geometric, ex_opt);
      } else if (ex_preset == "fig1d") {
        preset_recovery(os, ex_opt);
      } else if (ex_preset == "fig1e") {
        preset_new_elements(os, ex_opt);
      } else if (ex_preset == "fig2a") {
        preset_text(os, ex_opt);
      } else if (ex_preset == "fig2b") {
        preset_allocation(os, ex_opt);
      } else {
        preset_seen_twice(os, ex_opt);
      }
    }
    os.flush();
  } catch (const Infeasible& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMalformed;
  }
  return 0;
}
