#include "unseen/histfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include <ceres/ceres.h>

#include "unseen/histstat.hpp"
#include "unseen/kernels.hpp"
#include "unseen/numeric.hpp"
#include "unseen/parallel.hpp"

namespace unseen {

namespace {

thread_local detail::KeyProbe g_key_probe;

constexpr double kExpectationFloor = 1e-12;
constexpr double kAlphaCeiling = 1.0 - 1e-12;
// Box on log-masses and logits; outside it the line search backs off.
constexpr double kParamBound = 60.0;
// Smallest fitted rate on an active axis, as a multiple of 1 / n_j.
constexpr double kFloorFactor = 0.1;
constexpr double kNegligibleMass = 1e-9;

struct ObjectiveKeys {
  std::vector<IndexVector> keys;
  std::vector<double> phi;
  std::vector<double> weight;
  std::vector<double> log_phi_factorial;
};

// The only place objectives read fingerprint counts: keys with count < 2 are
// skipped before anything else looks at them.
ObjectiveKeys select_keys(const Fingerprint& fp) {
  ObjectiveKeys out;
  for (const auto& [key, count] : fp.entries()) {
    if (count < 2) continue;
    if (g_key_probe) g_key_probe(key, count);
    const double phi = static_cast<double>(count);
    out.keys.push_back(key);
    out.phi.push_back(phi);
    out.weight.push_back(1.0 / std::sqrt(1.0 + phi));
    out.log_phi_factorial.push_back(std::lgamma(phi + 1.0));
  }
  return out;
}

inline double loss_term(FitObjective objective, double phi, double weight, double log_fact,
                        double expected) {
  if (objective == FitObjective::counts) return weight * std::abs(phi - expected);
  const double e = std::max(expected, kExpectationFloor);
  return -(phi * std::log(e) - e - log_fact);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Probabilities on an active axis live in [floor, 1): alpha = floor +
// (1 - floor) * sigmoid(x). The floor keeps fitted points at a resolvable
// rate instead of drifting to ever more elements at ever smaller rates,
// a direction the fingerprint entries >= 2 cannot see.
struct AxisValue {
  double alpha;
  double log_p;
  double log_q;
  double slope;  // d alpha / dx
  double sig;
};

AxisValue axis_value(double x, double floor) {
  const double sig = 1.0 / (1.0 + std::exp(-x));
  AxisValue v;
  v.alpha = floor + (1.0 - floor) * sig;
  v.log_p = std::log(v.alpha);
  v.log_q = std::log1p(-floor) - softplus(x);
  v.slope = (1.0 - floor) * sig * (1.0 - sig);
  v.sig = sig;
  return v;
}

double axis_param(double alpha, double floor) {
  const double sig = std::clamp((alpha - floor) / (1.0 - floor), 1e-280, kAlphaCeiling);
  return std::log(sig) - std::log1p(-sig);
}

// One fitted support point: mass exp(log_h) at alpha_j = axis_value(logit_j)
// on active axes and exactly 0 elsewhere.
struct Point {
  double log_h = 0.0;
  std::vector<double> logit;
  std::vector<char> active;
};

struct Derived {
  double h = 0.0;
  std::vector<double> alpha;
  std::vector<double> log_p;
  std::vector<double> log_q;

  explicit Derived(std::size_t m) : alpha(m), log_p(m), log_q(m) {}

  void from(const Point& p, const std::vector<double>& floor) {
    h = std::exp(p.log_h);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (!p.active[j]) {
        alpha[j] = 0.0;
        log_p[j] = kernels::kLogZero;
        log_q[j] = 0.0;
      } else {
        const auto v = axis_value(p.logit[j], floor[j]);
        alpha[j] = v.alpha;
        log_p[j] = v.log_p;
        log_q[j] = v.log_q;
      }
    }
  }
};

struct Problem {
  std::size_t m = 0;
  Sizes n;
  ObjectiveKeys obj;
  kernels::KeyTable table;
  std::vector<double> target;
  std::vector<char> open;
  std::vector<double> floor;
  FitObjective objective = FitObjective::counts;
  double tolerance = 1e-4;
  double support_penalty = 0.0;

  Problem(std::size_t m_, Sizes n_, ObjectiveKeys keys, std::vector<double> target_, double tol,
          FitObjective objective_, double support_penalty_)
      : m(m_), n(std::move(n_)), obj(std::move(keys)), table(obj.keys, n), target(std::move(target_)),
        open(m_), floor(m_), objective(objective_), tolerance(tol),
        support_penalty(support_penalty_) {
    for (std::size_t j = 0; j < m; ++j) {
      open[j] = target[j] > 1e-3 * tolerance;
      floor[j] = kFloorFactor / static_cast<double>(std::max<std::uint64_t>(n[j], 1));
    }
  }
};

// Rescales, per axis, the part of each fitted probability above the floor so
// the fitted mass matches the target exactly. Returns false when that is not
// possible without clipping.
bool project_mass(const Problem& prob, std::vector<Point>& pts) {
  const std::size_t m = prob.m;
  std::vector<double> base(m, 0.0);
  std::vector<double> excess(m, 0.0);
  Derived d(m);
  for (const auto& p : pts) {
    d.from(p, prob.floor);
    for (std::size_t j = 0; j < m; ++j) {
      if (!p.active[j]) continue;
      base[j] += d.h * prob.floor[j];
      excess[j] += d.h * (d.alpha[j] - prob.floor[j]);
    }
  }
  bool exact = true;
  for (std::size_t j = 0; j < m; ++j) {
    if (!prob.open[j] || excess[j] <= 0.0) continue;
    double scale = (prob.target[j] - base[j]) / excess[j];
    if (scale <= 0.0) {
      scale = 1e-12;
      exact = false;
    }
    for (auto& p : pts) {
      if (!p.active[j]) continue;
      const double a = axis_value(p.logit[j], prob.floor[j]).alpha;
      double shifted = prob.floor[j] + (a - prob.floor[j]) * scale;
      if (shifted > kAlphaCeiling) {
        shifted = kAlphaCeiling;
        exact = false;
      }
      p.logit[j] = axis_param(shifted, prob.floor[j]);
    }
  }
  return exact;
}

class SupportSearch {
public:
  SupportSearch(const Problem& prob, std::vector<Point> pts, double penalty)
      : prob_(prob), pts_(std::move(pts)), s_(pts_.size()), keys_(prob.obj.keys.size()),
        rows_(s_ * keys_), expected_(keys_), mass_(prob.m), penalty_(penalty),
        scratch_(keys_), cand_(prob.m), cur_(prob.m) {
    steps_.assign(s_ * params(), 0.3);
    refresh();
  }

  // Runs penalty rounds until the mass residual is within tolerance or the
  // evaluation budget is spent.
  void optimize(std::size_t budget, std::size_t max_rounds = 10) {
    const std::size_t first_round = budget * 7 / 10;
    for (rounds_ = 0; rounds_ < max_rounds; ++rounds_) {
      const std::size_t remaining = budget > evals_ ? budget - evals_ : 0;
      if (remaining == 0) break;
      const std::size_t allowance = rounds_ == 0 ? first_round : std::max<std::size_t>(remaining / 2, 1);
      descend(evals_ + std::min(allowance, remaining));
      if (residual() <= 0.1 * prob_.tolerance) break;
      penalty_ *= 10.0;
      for (double& st : steps_) st = std::max(st, 0.05);
      refresh();
    }
  }

  double data_loss() const { return data_loss_; }
  /// Data loss plus the support-size penalty, the quantity restarts compete on.
  double regularized_loss() const { return data_loss_ + prob_.support_penalty * elements_; }
  double residual() const {
    double r = 0.0;
    for (std::size_t j = 0; j < prob_.m; ++j) r = std::max(r, std::abs(mass_[j] - target_of(j)));
    return r;
  }
  std::size_t evaluations() const { return evals_; }
  std::size_t rounds() const { return rounds_ + 1; }
  std::vector<Point>& points() { return pts_; }

  // Recomputes all per-point rows, expectations and masses from scratch.
  void refresh() {
    std::fill(expected_.begin(), expected_.end(), 0.0);
    std::fill(mass_.begin(), mass_.end(), 0.0);
    for (std::size_t k = 0; k < s_; ++k) {
      cur_.from(pts_[k], prob_.floor);
      std::span<double> row(rows_.data() + k * keys_, keys_);
      kernels::point_binomial_terms(prob_.table, cur_.log_p, cur_.log_q, cur_.h, row);
      for (std::size_t j = 0; j < prob_.m; ++j) mass_[j] += cur_.h * cur_.alpha[j];
    }
    for (std::size_t i = 0; i < keys_; ++i) {
      double e = 0.0;
      for (std::size_t k = 0; k < s_; ++k) e += rows_[k * keys_ + i];
      expected_[i] = e;
    }
    elements_ = 0.0;
    for (const auto& p : pts_) elements_ += std::exp(p.log_h);
    data_loss_ = 0.0;
    for (std::size_t i = 0; i < keys_; ++i) data_loss_ += term(i, expected_[i]);
    total_ = data_loss_ + prob_.support_penalty * elements_ + penalty_term(mass_);
  }

private:
  std::size_t params() const { return prob_.m + 2; }

  double target_of(std::size_t j) const { return prob_.open[j] ? prob_.target[j] : 0.0; }

  double term(std::size_t i, double e) const {
    return loss_term(prob_.objective, prob_.obj.phi[i], prob_.obj.weight[i],
                     prob_.obj.log_phi_factorial[i], e);
  }

  double penalty_term(const std::vector<double>& mass) const {
    double p = 0.0;
    for (std::size_t j = 0; j < prob_.m; ++j) {
      const double d = mass[j] - target_of(j);
      p += d * d;
    }
    return penalty_ * p;
  }

  // Applies parameter move `param` of size `delta` to a copy of point k.
  bool propose(std::size_t k, std::size_t param, double delta, Point& out) const {
    out = pts_[k];
    if (param == 0) {
      out.log_h += delta;
      return true;
    }
    if (param <= prob_.m) {
      const std::size_t j = param - 1;
      if (!out.active[j]) return false;
      out.logit[j] += delta;
      return true;
    }
    // Shift: more elements at proportionally lower probability, leaving
    // h * alpha_j nearly unchanged on every active axis.
    out.log_h += delta;
    bool any = false;
    for (std::size_t j = 0; j < prob_.m; ++j) {
      if (!out.active[j]) continue;
      any = true;
      const double a = axis_value(out.logit[j], prob_.floor[j]).alpha * std::exp(-delta);
      out.logit[j] = axis_param(std::min(a, kAlphaCeiling), prob_.floor[j]);
    }
    return any;
  }

  // Evaluates replacing point k by `cand`; commits it if the penalized loss
  // decreases.
  bool try_point(std::size_t k, const Point& cand) {
    ++evals_;
    cand_.from(cand, prob_.floor);
    if (!std::isfinite(cand_.h)) return false;
    kernels::point_binomial_terms(prob_.table, cand_.log_p, cand_.log_q, cand_.h, scratch_);
    const double* old_row = rows_.data() + k * keys_;
    double data = 0.0;
    for (std::size_t i = 0; i < keys_; ++i) {
      data += term(i, expected_[i] - old_row[i] + scratch_[i]);
    }
    cur_.from(pts_[k], prob_.floor);
    std::vector<double>& mass = mass_trial_;
    mass = mass_;
    for (std::size_t j = 0; j < prob_.m; ++j) {
      mass[j] += cand_.h * cand_.alpha[j] - cur_.h * cur_.alpha[j];
    }
    const double elements = elements_ - cur_.h + cand_.h;
    const double total = data + prob_.support_penalty * elements + penalty_term(mass);
    if (!(total < total_ - 1e-14 * std::abs(total_))) return false;

    double* row = rows_.data() + k * keys_;
    for (std::size_t i = 0; i < keys_; ++i) {
      expected_[i] += scratch_[i] - row[i];
      row[i] = scratch_[i];
    }
    mass_ = mass;
    pts_[k] = cand;
    data_loss_ = data;
    elements_ = elements;
    total_ = total;
    return true;
  }

  void descend(std::size_t eval_limit) {
    Point cand;
    while (evals_ < eval_limit) {
      const double before = total_;
      double largest_step = 0.0;
      for (std::size_t k = 0; k < s_ && evals_ < eval_limit; ++k) {
        for (std::size_t p = 0; p < params() && evals_ < eval_limit; ++p) {
          double& step = steps_[k * params() + p];
          if (step < 1e-9) continue;
          bool moved = false;
          for (double dir : {1.0, -1.0}) {
            if (!propose(k, p, dir * step, cand)) break;
            if (try_point(k, cand)) {
              moved = true;
              // Keep moving in the successful direction.
              if (dir < 0.0) step = -step;
              break;
            }
          }
          step = std::abs(step);
          step = moved ? std::min(step * 2.0, 4.0) : step * 0.5;
          largest_step = std::max(largest_step, step);
        }
      }
      refresh();
      const double gain = before - total_;
      if (largest_step < 1e-7 || (gain >= 0.0 && gain < 1e-13 * (1.0 + std::abs(total_)) &&
                                  largest_step < 1e-4)) {
        break;
      }
    }
  }

  const Problem& prob_;
  std::vector<Point> pts_;
  std::size_t s_;
  std::size_t keys_;
  std::vector<double> rows_;
  std::vector<double> expected_;
  std::vector<double> mass_;
  std::vector<double> mass_trial_;
  std::vector<double> steps_;
  double penalty_;
  double data_loss_ = 0.0;
  double elements_ = 0.0;
  double total_ = 0.0;
  std::size_t evals_ = 0;
  std::size_t rounds_ = 0;
  std::vector<double> scratch_;
  Derived cand_;
  Derived cur_;
};

// Smooth surrogate of the penalized loss for gradient descent: the counts
// objective's absolute value becomes sqrt(x^2 + eps^2) - eps, and the mass
// constraint enters as an augmented Lagrangian.
class SmoothLoss final : public ceres::FirstOrderFunction {
public:
  SmoothLoss(const Problem& prob, const std::vector<Point>& shape, double eps, double penalty,
             std::vector<double> lambda, std::size_t* counter)
      : prob_(prob), shape_(shape), eps_(eps), penalty_(penalty), lambda_(std::move(lambda)),
        counter_(counter) {
    for (const auto& p : shape_) {
      params_ += 1;
      for (char a : p.active) params_ += a ? 1 : 0;
    }
  }

  int NumParameters() const override { return static_cast<int>(params_); }

  bool Evaluate(const double* theta, double* cost, double* gradient) const override {
    ++*counter_;
    const std::size_t m = prob_.m;
    const std::size_t keys = prob_.obj.keys.size();
    const std::size_t s = shape_.size();
    const auto& table = prob_.table;
    std::vector<double> rows(s * keys);
    std::vector<double> expected(keys, 0.0);
    std::vector<double> mass(m, 0.0);
    std::vector<double> h(s);
    std::vector<double> alpha(s * m, 0.0);
    std::vector<double> slope(s * m, 0.0);
    std::vector<double> sig(s * m, 0.0);
    std::vector<double> lp(m);
    std::vector<double> lq(m);

    for (std::size_t q = 0; q < params_; ++q) {
      if (!(std::abs(theta[q]) <= kParamBound)) return false;
    }
    std::size_t at = 0;
    for (std::size_t k = 0; k < s; ++k) {
      h[k] = std::exp(theta[at++]);
      for (std::size_t j = 0; j < m; ++j) {
        if (!shape_[k].active[j]) {
          lp[j] = kernels::kLogZero;
          lq[j] = 0.0;
          continue;
        }
        const auto v = axis_value(theta[at++], prob_.floor[j]);
        lp[j] = v.log_p;
        lq[j] = v.log_q;
        alpha[k * m + j] = v.alpha;
        slope[k * m + j] = v.slope;
        sig[k * m + j] = v.sig;
        mass[j] += h[k] * v.alpha;
      }
      std::span<double> row(rows.data() + k * keys, keys);
      kernels::point_binomial_terms(table, lp, lq, h[k], row);
      for (std::size_t i = 0; i < keys; ++i) expected[i] += row[i];
    }

    std::vector<double> d_expected(keys);
    double total = 0.0;
    for (std::size_t i = 0; i < keys; ++i) {
      const double phi = prob_.obj.phi[i];
      const double e = expected[i];
      if (prob_.objective == FitObjective::counts) {
        const double r = e - phi;
        const double root = std::sqrt(r * r + eps_ * eps_);
        total += prob_.obj.weight[i] * (root - eps_);
        d_expected[i] = prob_.obj.weight[i] * r / root;
      } else if (e > kExpectationFloor) {
        total += -(phi * std::log(e) - e - prob_.obj.log_phi_factorial[i]);
        d_expected[i] = 1.0 - phi / e;
      } else {
        total += -(phi * std::log(kExpectationFloor) - kExpectationFloor - prob_.obj.log_phi_factorial[i]);
        d_expected[i] = 0.0;
      }
    }
    std::vector<double> d_mass(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (!prob_.open[j]) continue;
      const double c = mass[j] - prob_.target[j];
      total += lambda_[j] * c + 0.5 * penalty_ * c * c;
      d_mass[j] = lambda_[j] + penalty_ * c;
    }
    for (std::size_t k = 0; k < s; ++k) total += prob_.support_penalty * h[k];
    *cost = total;
    if (!std::isfinite(total)) return false;
    if (gradient == nullptr) return true;

    at = 0;
    for (std::size_t k = 0; k < s; ++k) {
      const double* row = rows.data() + k * keys;
      double g = 0.0;
      for (std::size_t i = 0; i < keys; ++i) g += d_expected[i] * row[i];
      for (std::size_t j = 0; j < m; ++j) g += d_mass[j] * h[k] * alpha[k * m + j];
      gradient[at++] = g + prob_.support_penalty * h[k];
      for (std::size_t j = 0; j < m; ++j) {
        if (!shape_[k].active[j]) continue;
        // d log bino / dx = i * slope / alpha - (n - i) * sigmoid(x)
        const double up = slope[k * m + j] / alpha[k * m + j];
        const double down = sig[k * m + j];
        const double* index = table.index.data() + j * table.stride;
        const double* rest = table.rest.data() + j * table.stride;
        double gx = 0.0;
        for (std::size_t i = 0; i < keys; ++i) {
          gx += d_expected[i] * row[i] * (index[i] * up - rest[i] * down);
        }
        gradient[at++] = gx + d_mass[j] * h[k] * slope[k * m + j];
      }
    }
    return true;
  }

  std::vector<double> residuals(const double* theta) const {
    std::vector<Point> pts = shape_;
    unpack(theta, pts);
    std::vector<double> mass(prob_.m, 0.0);
    Derived d(prob_.m);
    for (const auto& p : pts) {
      d.from(p, prob_.floor);
      for (std::size_t j = 0; j < prob_.m; ++j) mass[j] += d.h * d.alpha[j];
    }
    for (std::size_t j = 0; j < prob_.m; ++j) mass[j] = prob_.open[j] ? mass[j] - prob_.target[j] : 0.0;
    return mass;
  }

  static std::vector<double> pack(const std::vector<Point>& pts) {
    std::vector<double> theta;
    for (const auto& p : pts) {
      theta.push_back(p.log_h);
      for (std::size_t j = 0; j < p.active.size(); ++j) {
        if (p.active[j]) theta.push_back(p.logit[j]);
      }
    }
    return theta;
  }

  static void unpack(const double* theta, std::vector<Point>& pts) {
    std::size_t at = 0;
    for (auto& p : pts) {
      p.log_h = theta[at++];
      for (std::size_t j = 0; j < p.active.size(); ++j) {
        if (p.active[j]) p.logit[j] = theta[at++];
      }
    }
  }

private:
  const Problem& prob_;
  const std::vector<Point>& shape_;
  double eps_;
  double penalty_;
  std::vector<double> lambda_;
  std::size_t* counter_;
  std::size_t params_ = 0;
};

class EvalBudget final : public ceres::IterationCallback {
public:
  EvalBudget(const std::size_t* counter, std::size_t limit) : counter_(counter), limit_(limit) {}
  ceres::CallbackReturnType operator()(const ceres::IterationSummary&) override {
    return *counter_ >= limit_ ? ceres::SOLVER_TERMINATE_SUCCESSFULLY : ceres::SOLVER_CONTINUE;
  }

private:
  const std::size_t* counter_;
  std::size_t limit_;
};

struct GradientOutcome {
  std::size_t evaluations = 0;
  std::size_t rounds = 0;
  double penalty = 0.0;
};

// L-BFGS on the smoothed loss. Each outer round updates the multipliers,
// raises the penalty x10 while the mass residual exceeds the tolerance and
// tightens the smoothing, until the surrogate is within 1e-7 of the exact
// objective and the residual is well inside tolerance.
GradientOutcome gradient_stage(const Problem& prob, std::vector<Point>& pts, double penalty,
                               std::size_t budget) {
  GradientOutcome out;
  std::vector<double> lambda(prob.m, 0.0);
  double eps = prob.objective == FitObjective::counts ? 1.0 : 0.0;
  std::vector<double> theta = SmoothLoss::pack(pts);
  std::size_t counter = 0;
  for (out.rounds = 1; out.rounds <= 16; ++out.rounds) {
    auto* fn = new SmoothLoss(prob, pts, eps, penalty, lambda, &counter);
    ceres::GradientProblem problem(fn);
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_num_iterations = 5000;
    options.function_tolerance = 1e-13;
    options.gradient_tolerance = 1e-12;
    options.parameter_tolerance = 1e-12;
    options.logging_type = ceres::SILENT;
    EvalBudget stop(&counter, budget);
    options.callbacks.push_back(&stop);
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, theta.data(), &summary);

    const auto c = fn->residuals(theta.data());
    double worst = 0.0;
    for (std::size_t j = 0; j < prob.m; ++j) {
      lambda[j] += penalty * c[j];
      worst = std::max(worst, std::abs(c[j]));
    }
    const bool feasible = worst <= 0.1 * prob.tolerance;
    const bool sharp = eps <= 1e-7;
    if ((feasible && sharp) || counter >= budget) break;
    if (!feasible) penalty *= 10.0;
    eps = std::max(eps * 0.1, 1e-8);
    if (prob.objective == FitObjective::loglik) eps = 0.0;
  }
  SmoothLoss::unpack(theta.data(), pts);
  out.evaluations = counter;
  out.penalty = penalty;
  return out;
}

Point point_at(const Problem& prob, std::span<const double> alpha, double mass) {
  Point p;
  p.log_h = std::log(mass);
  p.logit.assign(prob.m, 0.0);
  p.active.assign(prob.m, 0);
  for (std::size_t j = 0; j < prob.m; ++j) {
    if (alpha[j] <= 0.0 || !prob.open[j]) continue;
    p.active[j] = 1;
    p.logit[j] = axis_param(alpha[j], prob.floor[j]);
  }
  return p;
}

// Support points seeded at the empirical rates of the largest fingerprint
// entries; surplus points copy an entry's zero pattern at lower rates and
// small mass.
std::vector<Point> initial_points(const Problem& prob, std::size_t s) {
  const auto& obj = prob.obj;
  std::vector<std::size_t> order(obj.keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return obj.phi[a] > obj.phi[b]; });
  std::vector<Point> pts;
  std::vector<double> alpha(prob.m);
  for (std::size_t r = 0; r < s; ++r) {
    const std::size_t i = order[r % order.size()];
    const std::size_t generation = r / order.size();
    const double shrink = std::ldexp(1.0, -static_cast<int>(generation));
    for (std::size_t j = 0; j < prob.m; ++j) {
      alpha[j] = shrink * static_cast<double>(obj.keys[i][j]) / static_cast<double>(prob.n[j]);
    }
    const double mass = generation == 0 ? obj.phi[i] : 1e-2;
    pts.push_back(point_at(prob, alpha, mass));
  }
  return pts;
}

// Log-uniform jitter of every mass and rate. A quarter of the points also
// switch on their inactive axes at half an observation's rate, so restarts
// can reach zero patterns that no fingerprint key shows.
std::vector<Point> perturbed(const Problem& prob, const std::vector<Point>& base, rng::Engine& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> pts = base;
  for (auto& p : pts) {
    p.log_h += u(gen) * std::log(4.0);
    const bool widen = u(gen) < -0.5;
    for (std::size_t j = 0; j < p.logit.size(); ++j) {
      if (!p.active[j]) {
        if (widen && prob.open[j]) {
          p.active[j] = 1;
          p.logit[j] = axis_param(std::max(0.5 / static_cast<double>(prob.n[j]), 2.0 * prob.floor[j]), prob.floor[j]);
        }
        continue;
      }
      const double a = axis_value(p.logit[j], prob.floor[j]).alpha * std::exp(u(gen) * std::log(3.0));
      p.logit[j] = axis_param(std::min(a, kAlphaCeiling), prob.floor[j]);
    }
  }
  return pts;
}

Histogram to_histogram(const Problem& prob, const std::vector<Point>& pts) {
  Histogram h(prob.m);
  Derived d(prob.m);
  for (const auto& p : pts) {
    d.from(p, prob.floor);
    // Points the optimizer emptied out carry no information.
    if (d.h > kNegligibleMass && std::isfinite(d.h)) h.add(d.alpha, d.h);
  }
  return h;
}

double evaluate(const Histogram& h, const Fingerprint& fp_rest, const Sizes& n, FitObjective objective) {
  require_same_m(h.m(), fp_rest.m(), "objective");
  require_same_m(n.size(), fp_rest.m(), "objective");
  const auto obj = select_keys(fp_rest);
  const auto expected = expected_fingerprint(h, n, obj.keys);
  double total = 0.0;
  for (std::size_t i = 0; i < obj.keys.size(); ++i) {
    total += loss_term(objective, obj.phi[i], obj.weight[i], obj.log_phi_factorial[i],
                       expected.at(obj.keys[i]));
  }
  return total;
}

}  // namespace

void detail::set_key_probe(KeyProbe probe) { g_key_probe = std::move(probe); }

void FitConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("FitConfig: restarts must be >= 1");
  if (max_evals < 1) throw std::invalid_argument("FitConfig: max_evals must be >= 1");
  if (!(penalty_weight > 0.0)) throw std::invalid_argument("FitConfig: penalty_weight must be > 0");
  if (!(support_penalty >= 0.0)) throw std::invalid_argument("FitConfig: support_penalty must be >= 0");
  if (!(mass_tolerance > 0.0 && mass_tolerance <= 1e-3)) {
    throw std::invalid_argument("FitConfig: mass_tolerance must be in (0, 1e-3]");
  }
}

std::pair<Histogram, Fingerprint> split_ones(const Fingerprint& fp, const Sizes& n) {
  require_same_m(n.size(), fp.m(), "split_ones");
  Histogram emp(fp.m());
  Fingerprint rest(fp.m(), fp.dims());
  ProbVector alpha(fp.m());
  for (const auto& [key, count] : fp.entries()) {
    if (count == 1) {
      for (std::size_t j = 0; j < fp.m(); ++j) {
        if (n[j] == 0 || key[j] > n[j]) throw std::invalid_argument("split_ones: key exceeds n");
        alpha[j] = static_cast<double>(key[j]) / static_cast<double>(n[j]);
      }
      emp.add(alpha, 1.0);
    } else {
      rest.add(key, count);
    }
  }
  return {std::move(emp), std::move(rest)};
}

double objective_counts(const Histogram& h, const Fingerprint& fp_rest, const Sizes& n) {
  return evaluate(h, fp_rest, n, FitObjective::counts);
}

double objective_loglik(const Histogram& h, const Fingerprint& fp_rest, const Sizes& n) {
  return -evaluate(h, fp_rest, n, FitObjective::loglik);
}

FitResult fit_histogram(const Fingerprint& fp, const Sizes& n, const FitConfig& cfg) {
  cfg.validate();
  require_same_m(n.size(), fp.m(), "fit_histogram");
  const std::size_t m = fp.m();
  auto [emp, rest] = split_ones(fp, n);

  const auto emp_mass = emp.population_mass();
  std::vector<double> target(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (emp_mass[j] > 1.0 + cfg.mass_tolerance) {
      throw Infeasible("fit_histogram: count-one entries carry mass " + std::to_string(emp_mass[j]) +
                       " > 1 on population " + std::to_string(j));
    }
    target[j] = std::max(0.0, 1.0 - emp_mass[j]);
  }

  FitResult result{Histogram(m), emp, Histogram(m), 0.0, {}};
  auto finish = [&](Histogram fitted) {
    result.fitted_part = std::move(fitted);
    result.histogram = result.emp_part;
    result.histogram.merge(result.fitted_part);
    const auto total = result.histogram.population_mass();
    result.diagnostics.mass_residuals.resize(m);
    for (std::size_t j = 0; j < m; ++j) result.diagnostics.mass_residuals[j] = total[j] - 1.0;
    const double loss = evaluate(result.fitted_part, rest, n, cfg.objective);
    result.objective_value = cfg.objective == FitObjective::counts ? loss : -loss;
    return result;
  };

  auto keys = select_keys(rest);
  if (keys.keys.empty()) {
    // Nothing to fit: spread the residual mass over R = max_j n_j elements
    // at a below-detection rate.
    result.diagnostics.degenerate = true;
    result.diagnostics.note = "no fingerprint entries >= 2; residual mass placed at rate residual_j / max_j n_j";
    Histogram fitted(m);
    const double spread = static_cast<double>(*std::max_element(n.begin(), n.end()));
    ProbVector alpha(m, 0.0);
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (target[j] > cfg.mass_tolerance * 1e-3) {
        alpha[j] = target[j] / std::max(spread, 1.0);
        any = true;
      }
    }
    if (any) fitted.add(alpha, std::max(spread, 1.0));
    return finish(std::move(fitted));
  }

  const std::size_t s = cfg.support_size ? cfg.support_size : std::max<std::size_t>(10, keys.keys.size());
  result.diagnostics.support_size = s;
  const Problem prob(m, n, std::move(keys), target, cfg.mass_tolerance, cfg.objective, cfg.support_penalty);

  auto base = initial_points(prob, s);
  project_mass(prob, base);

  struct Outcome {
    std::vector<Point> pts;
    double loss = 0.0;
    double residual = 0.0;
    std::size_t evals = 0;
    std::size_t rounds = 0;
    bool exact = true;
  };
  std::vector<Outcome> outcomes(cfg.restarts);
  parallel_for(cfg.restarts, [&](std::size_t r) {
    std::vector<Point> start = base;
    if (r > 0) {
      auto gen = rng::stream(cfg.seed, {0x6669u, r});
      start = perturbed(prob, base, gen);
      project_mass(prob, start);
    }
    const auto grad = gradient_stage(prob, start, cfg.penalty_weight, std::max<std::size_t>(1, cfg.max_evals / 2));
    Outcome out;
    out.exact = project_mass(prob, start);
    out.pts = start;
    {
      SupportSearch check(prob, out.pts, grad.penalty);
      out.loss = check.regularized_loss();
      out.residual = check.residual();
    }
    out.evals = grad.evaluations;
    out.rounds = grad.rounds;
    const std::size_t left = cfg.max_evals > grad.evaluations ? cfg.max_evals - grad.evaluations : 0;
    if (left > 0) {
      SupportSearch polish(prob, start, grad.penalty);
      polish.optimize(left, 4);
      out.evals += polish.evaluations();
      std::vector<Point> refined = polish.points();
      const bool exact = project_mass(prob, refined);
      SupportSearch check(prob, refined, grad.penalty);
      const bool ok = check.residual() <= cfg.mass_tolerance || check.residual() <= out.residual;
      if (ok && check.regularized_loss() < out.loss) {
        out.pts = std::move(refined);
        out.loss = check.regularized_loss();
        out.residual = check.residual();
        out.exact = exact;
      }
    }
    outcomes[r] = std::move(out);
  });

  std::size_t best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.diagnostics.restart_losses.push_back(outcomes[r].loss);
    result.diagnostics.evaluations += outcomes[r].evals;
    const auto key = [&](std::size_t i) {
      return std::make_tuple(outcomes[i].residual > cfg.mass_tolerance, outcomes[i].loss, i);
    };
    if (key(r) < key(best)) best = r;
  }
  result.diagnostics.best_restart = best;
  result.diagnostics.penalty_rounds = outcomes[best].rounds;
  if (!outcomes[best].exact) {
    result.diagnostics.note = "mass projection clipped a probability at 1; residual left to the penalty";
  }
  return finish(to_histogram(prob, outcomes[best].pts));
}

nlohmann::json fit_config_to_json(const FitConfig& cfg) {
  return {{"support_size", cfg.support_size},
          {"objective", cfg.objective == FitObjective::counts ? "counts" : "loglik"},
          {"restarts", cfg.restarts},
          {"max_evals", cfg.max_evals},
          {"penalty_weight", cfg.penalty_weight},
          {"seed", cfg.seed},
          {"mass_tolerance", cfg.mass_tolerance},
          {"support_penalty", cfg.support_penalty}};
}

FitConfig fit_config_from_json(const nlohmann::json& j) {
  FitConfig cfg;
  try {
    if (j.contains("support_size")) cfg.support_size = j.at("support_size").get<std::size_t>();
    if (j.contains("objective")) {
      const auto o = j.at("objective").get<std::string>();
      if (o == "counts") {
        cfg.objective = FitObjective::counts;
      } else if (o == "loglik") {
        cfg.objective = FitObjective::loglik;
      } else {
        throw FormatError("FitConfig: objective must be 'counts' or 'loglik'");
      }
    }
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<std::size_t>();
    if (j.contains("max_evals")) cfg.max_evals = j.at("max_evals").get<std::size_t>();
    if (j.contains("penalty_weight")) cfg.penalty_weight = j.at("penalty_weight").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mass_tolerance")) cfg.mass_tolerance = j.at("mass_tolerance").get<double>();
    if (j.contains("support_penalty")) cfg.support_penalty = j.at("support_penalty").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("FitConfig JSON: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return cfg;
}

nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  const auto h = r.histogram;
  j["m"] = h.m();
  j["entries"] = nlohmann::json::array();
  for (const auto& [key, e] : h.entries()) j["entries"].push_back({{"alpha", e.alpha}, {"mass", e.mass}});
  j["objective_value"] = r.objective_value;
  j["diagnostics"] = {{"evaluations", r.diagnostics.evaluations},
                      {"support_size", r.diagnostics.support_size},
                      {"best_restart", r.diagnostics.best_restart},
                      {"penalty_rounds", r.diagnostics.penalty_rounds},
                      {"degenerate", r.diagnostics.degenerate},
                      {"mass_residuals", r.diagnostics.mass_residuals},
                      {"restart_losses", r.diagnostics.restart_losses},
                      {"empirical_points", r.emp_part.size()},
                      {"fitted_points", r.fitted_part.size()},
                      {"note", r.diagnostics.note}};
  return j;
}

}  // namespace unseen
