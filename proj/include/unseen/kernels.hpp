#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "unseen/histogram.hpp"

// Data-parallel inner loops shared by the histogram statistics, the fitter and
// the allocator. Every kernel has a scalar reference and an AVX2/FMA variant;
// the variant is chosen once at startup from the CPU's capabilities and can be
// overridden with UNSEEN_SIMD=scalar|avx2 or set_backend().
//
// Probabilities enter the kernels in log form. log(0) is represented by the
// finite sentinel kLogZero so that a zero exponent times log(0) is exactly 0
// and a positive exponent drives the term to exp(-huge) = 0.

namespace unseen::kernels {

inline constexpr double kLogZero = -1e280;

enum class Backend { scalar, avx2 };

Backend active_backend() noexcept;
void set_backend(Backend b);
bool backend_available(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;

/// log(a) with the kLogZero sentinel for a == 0.
double safe_log(double a) noexcept;
/// log(1 - a) with the kLogZero sentinel for a == 1.
double safe_log1m(double a) noexcept;

/// Support points in axis-major structure-of-arrays layout.
/// log_p[j * stride + k] = log(alpha_kj), log_q[...] = log(1 - alpha_kj).
/// Rows are padded to `stride` with zero-mass points.
struct SupportTable {
  std::size_t count = 0;
  std::size_t axes = 0;
  std::size_t stride = 0;
  std::vector<double> mass;
  std::vector<double> log_p;
  std::vector<double> log_q;

  static SupportTable from_histogram(const Histogram& h);
  void resize(std::size_t points, std::size_t m);
  void set_point(std::size_t k, double point_mass, std::span<const double> alpha);
};

/// Fingerprint keys in axis-major layout: index[j * stride + i] = i_j and
/// rest[...] = n_j - i_j as doubles; log_coeff[i] = sum_j log C(n_j, i_j).
struct KeyTable {
  std::size_t count = 0;
  std::size_t axes = 0;
  std::size_t stride = 0;
  std::vector<double> index;
  std::vector<double> rest;
  std::vector<double> log_coeff;

  KeyTable(std::span<const IndexVector> keys, const Sizes& n);
};

/// sum_k mass_k * exp(log_coeff + sum_j (i_j log_p_jk + rest_j log_q_jk)),
/// the expected fingerprint entry at one key.
double binomial_mixture(const SupportTable& support, std::span<const double> index,
                        std::span<const double> rest, double log_coeff);

/// For one support point, out[i] = mass * prod_j bino(alpha_j, n_j, i_j) over
/// every key of the table.
void point_binomial_terms(const KeyTable& keys, std::span<const double> log_p,
                          std::span<const double> log_q, double mass, std::span<double> out);

/// sum_k mass_k * exp(sum_j a_j log_q_jk) * (1 - exp(sum_j b_j log_q_jk)).
/// With a = 0 this is the expected number of distinct elements in samples of
/// sizes b; with a = n_old it is the expected number of new distinct ones.
double survival_gain(const SupportTable& support, std::span<const double> a,
                     std::span<const double> b);

// Explicit-backend entry points for equivalence tests.
namespace scalar {
double binomial_mixture(const SupportTable&, std::span<const double>, std::span<const double>, double);
void point_binomial_terms(const KeyTable&, std::span<const double>, std::span<const double>, double,
                          std::span<double>);
double survival_gain(const SupportTable&, std::span<const double>, std::span<const double>);
void exp_array(std::span<const double> x, std::span<double> out);
void expm1_array(std::span<const double> x, std::span<double> out);
}  // namespace scalar

namespace avx2 {
double binomial_mixture(const SupportTable&, std::span<const double>, std::span<const double>, double);
void point_binomial_terms(const KeyTable&, std::span<const double>, std::span<const double>, double,
                          std::span<double>);
double survival_gain(const SupportTable&, std::span<const double>, std::span<const double>);
void exp_array(std::span<const double> x, std::span<double> out);
void expm1_array(std::span<const double> x, std::span<double> out);
}  // namespace avx2

}  // namespace unseen::kernels
