#pragma once

#include <map>
#include <span>

#include "unseen/fingerprint.hpp"
#include "unseen/histogram.hpp"

namespace unseen {

/// Expected fingerprint entries of samples of sizes n drawn from H:
/// sum_alpha H(alpha) prod_j C(n_j, i_j) alpha_j^{i_j} (1 - alpha_j)^{n_j - i_j}.
std::map<IndexVector, double> expected_fingerprint(const Histogram& h, const Sizes& n,
                                                   std::span<const IndexVector> keys);

/// Expected number of distinct elements observed in samples of sizes n.
double expected_distinct(const Histogram& h, const Sizes& n);

/// Expected number of elements unseen in n_old samples that appear among b
/// further samples.
double expected_new_distinct(const Histogram& h, const Sizes& n_old, const Sizes& b);

/// Expected number of elements unseen in n_old samples that appear at least k
/// times (k in {1, 2}) among b further samples, counts pooled over populations.
double expected_new_seen_at_least(const Histogram& h, const Sizes& n_old, const Sizes& b,
                                  unsigned k);

/// Expected probability mass covered by samples of sizes n, summed over
/// populations: sum_alpha H(alpha) sum_j alpha_j (1 - (1 - alpha_j)^{n_j}).
/// Experimental; one reading of "data needed to capture a mass fraction".
double covered_mass(const Histogram& h, const Sizes& n);

/// Smallest multiplier c (to within 1e-6 relative) such that samples of sizes
/// ceil(c * shape_j) cover `fraction` of the total mass sum_j M_j.
/// Experimental; throws NotApplicable if the fraction is unreachable.
double coverage_multiplier(const Histogram& h, const Sizes& shape, double fraction);

}  // namespace unseen
