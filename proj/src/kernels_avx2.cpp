// AVX2/FMA variants of the kernels in kernels.cpp. This translation unit is
// compiled with -mavx2 -mfma and is only entered after a runtime CPU check.

#include "unseen/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <algorithm>
#include <array>

namespace unseen::kernels::avx2 {

namespace {

constexpr double kInvFact[] = {
    1.0,
    1.0,
    1.0 / 2.0,
    1.0 / 6.0,
    1.0 / 24.0,
    1.0 / 120.0,
    1.0 / 720.0,
    1.0 / 5040.0,
    1.0 / 40320.0,
    1.0 / 362880.0,
    1.0 / 3628800.0,
    1.0 / 39916800.0,
    1.0 / 479001600.0,
    1.0 / 6227020800.0,
    1.0 / 87178291200.0,
};

// exp(x) by reduction x = k ln2 + r, |r| <= ln2/2, degree-13 Taylor series for
// exp(r) (truncation below 1e-17), and 2^k assembled in the exponent field.
// Inputs below -708 flush to zero.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634074)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.42860682030941723212E-6), r);

  __m256d p = _mm256_set1_pd(kInvFact[13]);
  for (int i = 12; i >= 0; --i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));

  const __m256d biased = _mm256_add_pd(k, _mm256_set1_pd(1023.0 + 6755399441055744.0));
  const __m256i bits = _mm256_slli_epi64(_mm256_castpd_si256(biased), 52);
  p = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(under, p);
}

// expm1(x): Taylor series of degree 14 for |x| < 0.35, exp(x) - 1 otherwise.
inline __m256d expm1_pd(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d small = _mm256_cmp_pd(_mm256_andnot_pd(sign_mask, x), _mm256_set1_pd(0.35), _CMP_LT_OQ);
  __m256d p = _mm256_set1_pd(kInvFact[14]);
  for (int i = 13; i >= 1; --i) p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(kInvFact[i]));
  const __m256d series = _mm256_mul_pd(p, x);
  const __m256d direct = _mm256_sub_pd(exp_pd(x), _mm256_set1_pd(1.0));
  return _mm256_blendv_pd(direct, series, small);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double binomial_mixture(const SupportTable& s, std::span<const double> index,
                        std::span<const double> rest, double log_coeff) {
  __m256d acc = _mm256_setzero_pd();
  const __m256d base = _mm256_set1_pd(log_coeff);
  for (std::size_t k = 0; k < s.stride; k += 4) {
    __m256d e = base;
    for (std::size_t j = 0; j < s.axes; ++j) {
      const double* lp = s.log_p.data() + j * s.stride + k;
      const double* lq = s.log_q.data() + j * s.stride + k;
      e = _mm256_fmadd_pd(_mm256_set1_pd(index[j]), _mm256_loadu_pd(lp), e);
      e = _mm256_fmadd_pd(_mm256_set1_pd(rest[j]), _mm256_loadu_pd(lq), e);
    }
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(s.mass.data() + k), exp_pd(e), acc);
  }
  return hsum(acc);
}

void point_binomial_terms(const KeyTable& keys, std::span<const double> log_p,
                          std::span<const double> log_q, double mass, std::span<double> out) {
  const __m256d vmass = _mm256_set1_pd(mass);
  for (std::size_t i = 0; i < keys.stride; i += 4) {
    __m256d e = _mm256_loadu_pd(keys.log_coeff.data() + i);
    for (std::size_t j = 0; j < keys.axes; ++j) {
      const double* idx = keys.index.data() + j * keys.stride + i;
      const double* rst = keys.rest.data() + j * keys.stride + i;
      e = _mm256_fmadd_pd(_mm256_loadu_pd(idx), _mm256_set1_pd(log_p[j]), e);
      e = _mm256_fmadd_pd(_mm256_loadu_pd(rst), _mm256_set1_pd(log_q[j]), e);
    }
    const __m256d v = _mm256_mul_pd(vmass, exp_pd(e));
    if (i + 4 <= keys.count) {
      _mm256_storeu_pd(out.data() + i, v);
    } else {
      alignas(32) std::array<double, 4> tail{};
      _mm256_store_pd(tail.data(), v);
      std::copy_n(tail.begin(), keys.count - i, out.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
}

double survival_gain(const SupportTable& s, std::span<const double> a, std::span<const double> b) {
  __m256d acc = _mm256_setzero_pd();
  const __m256d neg = _mm256_set1_pd(-1.0);
  for (std::size_t k = 0; k < s.stride; k += 4) {
    __m256d ea = _mm256_setzero_pd();
    __m256d eb = _mm256_setzero_pd();
    for (std::size_t j = 0; j < s.axes; ++j) {
      const __m256d lq = _mm256_loadu_pd(s.log_q.data() + j * s.stride + k);
      ea = _mm256_fmadd_pd(_mm256_set1_pd(a[j]), lq, ea);
      eb = _mm256_fmadd_pd(_mm256_set1_pd(b[j]), lq, eb);
    }
    const __m256d term = _mm256_mul_pd(exp_pd(ea), _mm256_mul_pd(neg, expm1_pd(eb)));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(s.mass.data() + k), term, acc);
  }
  return hsum(acc);
}

void exp_array(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) _mm256_storeu_pd(out.data() + i, exp_pd(_mm256_loadu_pd(x.data() + i)));
  for (; i < x.size(); ++i) {
    alignas(32) std::array<double, 4> buf{x[i], 0, 0, 0};
    _mm256_store_pd(buf.data(), exp_pd(_mm256_load_pd(buf.data())));
    out[i] = buf[0];
  }
}

void expm1_array(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) _mm256_storeu_pd(out.data() + i, expm1_pd(_mm256_loadu_pd(x.data() + i)));
  for (; i < x.size(); ++i) {
    alignas(32) std::array<double, 4> buf{x[i], 0, 0, 0};
    _mm256_store_pd(buf.data(), expm1_pd(_mm256_load_pd(buf.data())));
    out[i] = buf[0];
  }
}

}  // namespace unseen::kernels::avx2

#else

// Non-x86 builds: the AVX2 entry points forward to the scalar reference and
// backend_available(avx2) reports false.
namespace unseen::kernels::avx2 {
double binomial_mixture(const SupportTable& s, std::span<const double> i, std::span<const double> r,
                        double c) {
  return scalar::binomial_mixture(s, i, r, c);
}
void point_binomial_terms(const KeyTable& k, std::span<const double> p, std::span<const double> q,
                          double m, std::span<double> o) {
  scalar::point_binomial_terms(k, p, q, m, o);
}
double survival_gain(const SupportTable& s, std::span<const double> a, std::span<const double> b) {
  return scalar::survival_gain(s, a, b);
}
void exp_array(std::span<const double> x, std::span<double> o) { scalar::exp_array(x, o); }
void expm1_array(std::span<const double> x, std::span<double> o) { scalar::expm1_array(x, o); }
}  // namespace unseen::kernels::avx2

#endif
