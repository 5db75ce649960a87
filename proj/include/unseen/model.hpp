#pragma once

#include "unseen/histogram.hpp"
#include "unseen/types.hpp"

namespace unseen {

/// Labeled ground-truth distributions D_1..D_m over a shared finite domain.
/// Stored element-major: probs()[x][j] is the probability of labels()[x] in
/// population j. Used for simulation and exact oracles only.
class PopulationModel {
public:
  /// Validates that each population sums to one within 1e-9 and that every
  /// probability is in [0, 1].
  PopulationModel(std::size_t m, std::vector<Label> labels, std::vector<ProbVector> probs);

  std::size_t m() const noexcept { return m_; }
  std::size_t domain_size() const noexcept { return labels_.size(); }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  const std::vector<ProbVector>& probs() const noexcept { return probs_; }

  /// Probability column of population j, aligned with labels().
  std::vector<double> population(std::size_t j) const;

  /// The true histogram: integer mass at each distinct probability vector.
  Histogram histogram() const;

private:
  std::size_t m_;
  std::vector<Label> labels_;
  std::vector<ProbVector> probs_;
};

}  // namespace unseen
