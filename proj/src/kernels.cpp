#include "unseen/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace unseen::kernels {

namespace {

constexpr std::size_t kLanes = 4;

std::size_t padded(std::size_t n) { return (n + kLanes - 1) / kLanes * kLanes; }

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  if (const char* env = std::getenv("UNSEEN_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

double log_binomial(std::uint64_t n, std::uint64_t i) {
  if (i == 0 || i == n) return 0.0;
  const double nd = static_cast<double>(n);
  const double id = static_cast<double>(i);
  return std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0);
}

}  // namespace

Backend active_backend() noexcept { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::runtime_error(std::string("SIMD backend not available on this CPU: ") +
                             std::string(backend_name(b)));
  }
  backend_slot().store(b, std::memory_order_relaxed);
}

bool backend_available(Backend b) noexcept {
  return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

double safe_log(double a) noexcept { return a > 0.0 ? std::log(a) : kLogZero; }

double safe_log1m(double a) noexcept { return a < 1.0 ? std::log1p(-a) : kLogZero; }

void SupportTable::resize(std::size_t points, std::size_t m) {
  count = points;
  axes = m;
  stride = padded(points);
  mass.assign(stride, 0.0);
  log_p.assign(stride * m, 0.0);
  log_q.assign(stride * m, 0.0);
}

void SupportTable::set_point(std::size_t k, double point_mass, std::span<const double> alpha) {
  mass[k] = point_mass;
  for (std::size_t j = 0; j < axes; ++j) {
    log_p[j * stride + k] = safe_log(alpha[j]);
    log_q[j * stride + k] = safe_log1m(alpha[j]);
  }
}

SupportTable SupportTable::from_histogram(const Histogram& h) {
  SupportTable t;
  t.resize(h.size(), h.m());
  std::size_t k = 0;
  for (const auto& [key, entry] : h.entries()) t.set_point(k++, entry.mass, entry.alpha);
  return t;
}

KeyTable::KeyTable(std::span<const IndexVector> keys, const Sizes& n)
    : count(keys.size()), axes(n.size()), stride(padded(keys.size())) {
  index.assign(stride * axes, 0.0);
  rest.assign(stride * axes, 0.0);
  log_coeff.assign(stride, kLogZero);
  for (std::size_t i = 0; i < count; ++i) {
    require_same_m(keys[i].size(), axes, "KeyTable");
    double lc = 0.0;
    for (std::size_t j = 0; j < axes; ++j) {
      if (keys[i][j] > n[j]) throw std::invalid_argument("KeyTable: key index exceeds sample size");
      index[j * stride + i] = keys[i][j];
      rest[j * stride + i] = static_cast<double>(n[j] - keys[i][j]);
      lc += log_binomial(n[j], keys[i][j]);
    }
    log_coeff[i] = lc;
  }
}

namespace scalar {

double binomial_mixture(const SupportTable& s, std::span<const double> index,
                        std::span<const double> rest, double log_coeff) {
  double total = 0.0;
  for (std::size_t k = 0; k < s.count; ++k) {
    double e = log_coeff;
    for (std::size_t j = 0; j < s.axes; ++j) {
      e += index[j] * s.log_p[j * s.stride + k] + rest[j] * s.log_q[j * s.stride + k];
    }
    total += s.mass[k] * std::exp(e);
  }
  return total;
}

void point_binomial_terms(const KeyTable& keys, std::span<const double> log_p,
                          std::span<const double> log_q, double mass, std::span<double> out) {
  for (std::size_t i = 0; i < keys.count; ++i) {
    double e = keys.log_coeff[i];
    for (std::size_t j = 0; j < keys.axes; ++j) {
      e += keys.index[j * keys.stride + i] * log_p[j] + keys.rest[j * keys.stride + i] * log_q[j];
    }
    out[i] = mass * std::exp(e);
  }
}

double survival_gain(const SupportTable& s, std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t k = 0; k < s.count; ++k) {
    double ea = 0.0;
    double eb = 0.0;
    for (std::size_t j = 0; j < s.axes; ++j) {
      ea += a[j] * s.log_q[j * s.stride + k];
      eb += b[j] * s.log_q[j * s.stride + k];
    }
    total += s.mass[k] * std::exp(ea) * -std::expm1(eb);
  }
  return total;
}

void exp_array(std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

void expm1_array(std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::expm1(x[i]);
}

}  // namespace scalar

double binomial_mixture(const SupportTable& support, std::span<const double> index,
                        std::span<const double> rest, double log_coeff) {
  return active_backend() == Backend::avx2
             ? avx2::binomial_mixture(support, index, rest, log_coeff)
             : scalar::binomial_mixture(support, index, rest, log_coeff);
}

void point_binomial_terms(const KeyTable& keys, std::span<const double> log_p,
                          std::span<const double> log_q, double mass, std::span<double> out) {
  if (active_backend() == Backend::avx2) {
    avx2::point_binomial_terms(keys, log_p, log_q, mass, out);
  } else {
    scalar::point_binomial_terms(keys, log_p, log_q, mass, out);
  }
}

double survival_gain(const SupportTable& support, std::span<const double> a,
                     std::span<const double> b) {
  return active_backend() == Backend::avx2 ? avx2::survival_gain(support, a, b)
                                           : scalar::survival_gain(support, a, b);
}

}  // namespace unseen::kernels
