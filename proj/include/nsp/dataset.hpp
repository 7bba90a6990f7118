#pragma once

#include <optional>
#include <vector>

#include "nsp/core.hpp"

namespace nsp {

/// One execution from a task's initial state: states[i+1] is the result of
/// skills[i]; `failed`, when set, is a skill that then failed on states.back().
/// Keeping whole executions lets abstraction replay the perception context.
struct Trajectory {
  int task_id = -1;
  std::vector<FeatureState> states;
  std::vector<GroundSkill> skills;
  std::optional<GroundSkill> failed;
};

struct PositiveRef {
  std::size_t trajectory;
  std::size_t step;
};

/// Append-only collection of executions. Positive segments are
/// (states[i], skills[i], states[i+1]); negative tuples are (states.back(), failed).
struct TransitionDataset {
  std::vector<Trajectory> trajectories;

  void append(const TransitionDataset& other);
  void add(Trajectory t);
  std::size_t num_positives() const;
  std::size_t num_negatives() const;
  std::size_t size() const { return num_positives() + num_negatives(); }
  bool empty() const { return size() == 0; }
};

}  // namespace nsp
