#include "nsp/dataset.hpp"

namespace nsp {

void TransitionDataset::append(const TransitionDataset& other) {
  trajectories.insert(trajectories.end(), other.trajectories.begin(), other.trajectories.end());
}

void TransitionDataset::add(Trajectory t) {
  if (t.skills.empty() && !t.failed) return;
  trajectories.push_back(std::move(t));
}

std::size_t TransitionDataset::num_positives() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.skills.size();
  return n;
}

std::size_t TransitionDataset::num_negatives() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.failed ? 1 : 0;
  return n;
}

}  // namespace nsp
