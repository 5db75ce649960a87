#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace unseen {

/// Per-population observation counts (i_1, ..., i_m) used as fingerprint keys.
using IndexVector = std::vector<std::uint32_t>;

/// Per-population probabilities (alpha_1, ..., alpha_m) used as histogram keys.
using ProbVector = std::vector<double>;

/// Per-population sample sizes (n_1, ..., n_m), or new-sample counts b_j.
using Sizes = std::vector<std::uint64_t>;

/// Domain-element identifier. Text and TSV inputs map strings onto these.
using Label = std::uint64_t;

// Error types. Everything derives from std::runtime_error or
// std::invalid_argument so callers can catch broadly.

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class NotApplicable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Infeasible : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TooLarge : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require_same_m(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": population count " + std::to_string(a) +
                            " does not match " + std::to_string(b));
  }
}

}  // namespace unseen
