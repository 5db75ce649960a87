#pragma once

// Dense LP oracle for transport problems, shared by the EMD unit tests and
// the acceptance binary.

#include <algorithm>
#include <random>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "unseen/histogram.hpp"

namespace unseen::test_support {

// Dense two-phase simplex with Bland's rule: min c.x s.t. A x = b, x >= 0, b >= 0.
class DenseLp {
public:
  DenseLp(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c)
      : rows_(a.size()), cols_(c.size()), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

  double solve() {
    // Tableau columns: original, artificial, rhs.
    const std::size_t width = cols_ + rows_ + 1;
    t_.assign(rows_ + 1, std::vector<double>(width, 0.0));
    basis_.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) t_[r][c] = a_[r][c];
      t_[r][cols_ + r] = 1.0;
      t_[r][width - 1] = b_[r];
      basis_[r] = cols_ + r;
    }
    // Phase one minimizes the sum of artificials.
    std::vector<double> phase1(width - 1, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) phase1[cols_ + r] = 1.0;
    set_objective(phase1);
    run(width - 1);
    if (std::abs(t_[rows_][width - 1]) > 1e-9) throw std::runtime_error("DenseLp: infeasible");

    // Drive remaining artificials out of the basis or drop redundant rows.
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) continue;
      std::size_t enter = cols_;
      for (std::size_t c = 0; c < cols_ && enter == cols_; ++c) {
        if (std::abs(t_[r][c]) > 1e-9) enter = c;
      }
      if (enter < cols_) {
        pivot(r, enter);
      } else {
        std::fill(t_[r].begin(), t_[r].end(), 0.0);
      }
    }
    std::vector<double> phase2(width - 1, 0.0);
    for (std::size_t c = 0; c < cols_; ++c) phase2[c] = c_[c];
    set_objective(phase2);
    run(cols_);
    return -t_[rows_][width - 1];
  }

private:
  void set_objective(const std::vector<double>& cost) {
    auto& z = t_[rows_];
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t c = 0; c < cost.size(); ++c) z[c] = cost[c];
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < z.size(); ++c) z[c] -= cb * t_[r][c];
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = t_[row][col];
    for (auto& v : t_[row]) v /= p;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == row) continue;
      const double f = t_[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < t_[r].size(); ++c) t_[r][c] -= f * t_[row][c];
    }
    basis_[row] = col;
  }

  void run(std::size_t allowed_cols) {
    const std::size_t rhs = t_[0].size() - 1;
    for (int iter = 0; iter < 100000; ++iter) {
      std::size_t enter = allowed_cols;
      for (std::size_t c = 0; c < allowed_cols; ++c) {
        if (t_[rows_][c] < -1e-12) {
          enter = c;
          break;
        }
      }
      if (enter == allowed_cols) return;
      std::size_t leave = rows_;
      double best = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (t_[r][enter] > 1e-12) {
          const double ratio = t_[r][rhs] / t_[r][enter];
          if (leave == rows_ || ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis_[r] < basis_[leave])) {
            leave = r;
            best = ratio;
          }
        }
      }
      if (leave == rows_) throw std::runtime_error("DenseLp: unbounded");
      pivot(leave, enter);
    }
    throw std::runtime_error("DenseLp: iteration limit");
  }

  std::size_t rows_, cols_;
  std::vector<std::vector<double>> a_;
  std::vector<double> b_, c_;
  std::vector<std::vector<double>> t_;
  std::vector<std::size_t> basis_;
};

// EMD as an explicit transportation LP with the zero vector on both sides.
inline double emd_oracle(const Histogram& h1, const Histogram& h2) {
  const std::size_t m = h1.m();
  std::vector<ProbVector> src{ProbVector(m, 0.0)}, dst{ProbVector(m, 0.0)};
  std::vector<double> supply{h2.total_mass()}, demand{h1.total_mass()};
  for (const auto& [k, e] : h1.entries()) {
    src.push_back(e.alpha);
    supply.push_back(e.mass);
  }
  for (const auto& [k, e] : h2.entries()) {
    dst.push_back(e.alpha);
    demand.push_back(e.mass);
  }
  const std::size_t s = src.size(), d = dst.size();
  std::vector<std::vector<double>> a(s + d, std::vector<double>(s * d, 0.0));
  std::vector<double> b(s + d), c(s * d);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      a[i][i * d + k] = 1.0;
      a[s + k][i * d + k] = 1.0;
      double l1 = 0.0;
      for (std::size_t j = 0; j < m; ++j) l1 += std::abs(src[i][j] - dst[k][j]);
      c[i * d + k] = l1 / (2.0 * static_cast<double>(m));
    }
  }
  for (std::size_t i = 0; i < s; ++i) b[i] = supply[i];
  for (std::size_t k = 0; k < d; ++k) b[s + k] = demand[k];
  return DenseLp(a, b, c).solve();
}

// Up to four support points, per-population mass at most one.
inline Histogram random_emd_histogram(std::mt19937_64& gen, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 4);
  std::vector<std::pair<ProbVector, double>> pts;
  const int k = count(gen);
  for (int p = 0; p < k; ++p) {
    ProbVector alpha(m);
    for (auto& a : alpha) a = u(gen) < 0.25 ? 0.0 : u(gen);
    pts.emplace_back(alpha, 0.2 + 3.0 * u(gen));
  }
  std::vector<double> mass(m, 0.0);
  for (const auto& [alpha, w] : pts) {
    for (std::size_t j = 0; j < m; ++j) mass[j] += alpha[j] * w;
  }
  const double scale = std::max(1.0, *std::max_element(mass.begin(), mass.end()));
  Histogram h(m);
  for (const auto& [alpha, w] : pts) h.add(alpha, w / scale);
  return h;
}

}  // namespace unseen::test_support
