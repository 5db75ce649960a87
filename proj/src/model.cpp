#include "unseen/model.hpp"

#include <cmath>
#include <string>

namespace unseen {

PopulationModel::PopulationModel(std::size_t m, std::vector<Label> labels,
                                 std::vector<ProbVector> probs)
    : m_(m), labels_(std::move(labels)), probs_(std::move(probs)) {
  if (m_ == 0) throw std::invalid_argument("PopulationModel: m must be >= 1");
  if (labels_.size() != probs_.size()) {
    throw std::invalid_argument("PopulationModel: labels and probabilities differ in length");
  }
  std::vector<double> sums(m_, 0.0);
  for (const auto& p : probs_) {
    require_same_m(p.size(), m_, "PopulationModel");
    for (std::size_t j = 0; j < m_; ++j) {
      if (!(p[j] >= 0.0 && p[j] <= 1.0)) {
        throw std::invalid_argument("PopulationModel: probability outside [0,1]");
      }
      sums[j] += p[j];
    }
  }
  for (std::size_t j = 0; j < m_; ++j) {
    if (std::abs(sums[j] - 1.0) > 1e-9) {
      throw std::invalid_argument("PopulationModel: population " + std::to_string(j) +
                                  " sums to " + std::to_string(sums[j]));
    }
  }
}

std::vector<double> PopulationModel::population(std::size_t j) const {
  if (j >= m_) throw std::out_of_range("PopulationModel::population: index out of range");
  std::vector<double> col(probs_.size());
  for (std::size_t x = 0; x < probs_.size(); ++x) col[x] = probs_[x][j];
  return col;
}

Histogram PopulationModel::histogram() const {
  Histogram h(m_);
  for (const auto& p : probs_) h.add(p, 1.0);
  return h;
}

}  // namespace unseen
