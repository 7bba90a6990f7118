#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "nsp/abstraction.hpp"
#include "nsp/dataset.hpp"
#include "nsp/worldmodel.hpp"

namespace nsp {

struct HighLevelPlan {
  std::vector<GroundHLA> steps;
  /// Predicted abstract states; trajectory.size() == steps.size() + 1.
  std::vector<AbstractState> trajectory;
};

struct PlannerConfig {
  int n_abstract = 8;
  std::size_t node_budget = 100000;
};

struct SearchStats {
  std::size_t expanded = 0;
  std::size_t generated = 0;
};

/// Number of goal atoms missing from `s`.
std::size_t goal_count_h(const AbstractState& s, const std::vector<GroundAtom>& goal);

/// Lazily enumerates distinct high-level plans in nondecreasing length.
///
/// Best-first search (f = g + goal-count, FIFO among ties) over plan
/// prefixes. Each abstract state may be expanded at most n_abstract times,
/// which yields the n_abstract cheapest distinct action sequences while
/// keeping the search bounded by the number of reachable states. Goal nodes
/// are emitted and never expanded. Expansion stops at node_budget.
class PlanStream {
public:
  PlanStream(const PredicateTable& table, const std::vector<HLA>& hlas, const Task& task,
             const AbstractState& init, PlannerConfig config);
  ~PlanStream();
  PlanStream(PlanStream&&) noexcept;
  PlanStream& operator=(PlanStream&&) noexcept;

  /// Next plan, or nullopt once n_abstract plans were produced or the search
  /// space/budget is exhausted.
  std::optional<HighLevelPlan> next();

  std::size_t emitted() const;
  const SearchStats& stats() const;
  /// The ground operators searched over (valid for the lifetime of the stream).
  const std::vector<GroundHLA>& ground_operators() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper collecting the whole stream.
std::vector<HighLevelPlan> plan_stream(const PredicateTable& table, const std::vector<HLA>& hlas,
                                       const Task& task, const AbstractState& init, PlannerConfig config,
                                       SearchStats* stats = nullptr);

/// True when each step is applicable along the predicted trajectory, every
/// predicted state matches apply(), and the endpoint satisfies the goal.
bool validate_plan(const HighLevelPlan& plan, const AbstractState& init, const std::vector<GroundAtom>& goal,
                   const PredicateTable& table, const std::vector<Object>& objects);

enum class OutcomeKind { Satisficing, Infeasible, NotSatisficing };

struct ExecutionOutcome {
  OutcomeKind kind = OutcomeKind::NotSatisficing;
  std::size_t failed_step = 0;
  Trajectory data;
};

struct PerceptionSetup {
  const TypeTable* types = nullptr;
  const Perceiver* perceiver = nullptr;
  EvalOptions opts;
};

/// Abstracts every state of a trajectory, replaying the perception context.
std::vector<AbstractState> abstract_trajectory(const Trajectory& t, const PredicateTable& table,
                                               const PerceptionSetup& setup);

/// Resets `env` to `task` and runs each step's skill. Stops at the first
/// failure (Infeasible); otherwise checks the goal on the re-abstracted final
/// low-level state.
ExecutionOutcome execute_hierarchically(const HighLevelPlan& plan, Environment& env, const Task& task,
                                        const PredicateTable& table, const PerceptionSetup& setup);

}  // namespace nsp
