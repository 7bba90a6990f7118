#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsp/envs.hpp"
#include "nsp/learner.hpp"
#include "nsp/planner.hpp"
#include "nsp/proposer.hpp"

namespace nsp {

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

/// Result of planning and executing on one task with a frozen model.
struct TaskAttempt {
  int task_id = -1;
  bool solved = false;
  bool impossible = false;
  /// The planner produced no plan at all.
  bool no_plan = false;
  std::size_t plans_executed = 0;
  std::size_t nodes = 0;
  /// Emitted plans that failed validate_plan, and repeated plans (both should stay 0).
  std::size_t invalid_plans = 0;
  std::size_t duplicate_plans = 0;
  std::vector<Trajectory> data;
  std::optional<Trajectory> satisficing;
};

/// Plans with `model` and executes plans in stream order until one is
/// satisficing or the stream ends. An impossible task counts as solved when
/// no plan is found.
TaskAttempt attempt_task(const Model& model, Environment& env, const Task& task, const PlannerConfig& pc,
                         const PerceptionSetup& setup);

/// attempt_task over all tasks, fanned across `workers` environments; results are in task order.
std::vector<TaskAttempt> attempt_tasks(const Model& model, const EnvFactory& make_env, const std::vector<Task>& tasks,
                                       const PlannerConfig& pc, const PerceptionSetup& setup,
                                       std::size_t workers = 1);

struct ExploreResult {
  TransitionDataset data;
  double rho = 0.0;
  std::size_t nu = 0;
  std::vector<TaskAttempt> attempts;
};

/// Attempts every task with `model`. rho is the solved fraction, nu the number of executed
/// plans that were not satisficing.
ExploreResult explore(const Model& model, const EnvFactory& make_env, const std::vector<Task>& tasks,
                      const PlannerConfig& pc, const PerceptionSetup& setup, std::size_t workers = 1);

struct OnlineConfig {
  int max_iters = 10;
  PlannerConfig planner;
  SelectionConfig selection;
  PerceiverConfig perceiver;
  std::size_t workers = 1;
};

struct IterationRecord {
  int i = 0;
  double rho = 0.0;
  std::size_t nu = 0;
  double prev_rho = -std::numeric_limits<double>::infinity();
  std::size_t prev_nu = std::numeric_limits<std::size_t>::max();
  bool improved_best = false;
  bool proposed = false;
  std::vector<std::string> strategies;
  std::size_t num_proposed = 0;
  std::size_t num_candidates = 0;
  /// Predicates and operators of the model learned at the end of the iteration.
  std::vector<std::string> psi;
  std::size_t num_hlas = 0;
  std::size_t data_size = 0;
  /// Explored plans that failed validate_plan, and repeats within one task's stream.
  std::size_t invalid_plans = 0;
  std::size_t duplicate_plans = 0;
  double rho_best = 0.0;
  std::size_t nu_best = 0;
  /// Not part of the deterministic metrics.
  double seconds = 0.0;
};

/// Propose when the solved fraction did not rise (or stayed equal with more
/// failed plans). Iteration 1 always proposes.
bool should_propose(int i, double rho, std::size_t nu, double prev_rho, std::size_t prev_nu);

/// Final operator set of an iteration. An initial HLA with preconditions is
/// given knowledge: it is kept verbatim (when psi covers it) and replaces
/// learned HLAs of its skill with the same effects. Other initial HLAs are
/// kept only if they add a goal-predicate atom that no learned HLA of the same
/// skill adds; their atoms outside psi are dropped.
std::vector<HLA> merge_initial_hlas(const std::vector<HLA>& initial, std::vector<HLA> learned,
                                    const PredicateTable& psi, const std::set<std::string>& goal_predicates);

struct OnlineResult {
  Model best;
  double rho_best = -std::numeric_limits<double>::infinity();
  std::size_t nu_best = std::numeric_limits<std::size_t>::max();
  std::vector<IterationRecord> trace;
  TransitionDataset data;
  std::size_t proposal_calls = 0;
};

using ProgressSink = std::function<void(const IterationRecord&)>;

OnlineResult run_online(const DomainSpec& spec, const EnvFactory& make_env, const std::vector<Task>& tasks,
                        ProposalSource& proposer, const OnlineConfig& cfg, TransitionDataset d0 = {},
                        const ProgressSink& progress = {});

struct EvalReport {
  std::vector<TaskAttempt> tasks;
  std::size_t solved = 0;
  double solve_rate = 0.0;
  /// Executed plans per solved task, and that count over n_abstract.
  double plans_per_solved = 0.0;
  double budget_fraction = 0.0;
  double mean_nodes = 0.0;
  std::size_t impossible = 0;
  std::size_t impossible_detected = 0;
  std::size_t invalid_plans = 0;
  std::size_t duplicate_plans = 0;
};

EvalReport evaluate(const Model& model, const EnvFactory& make_env, const std::vector<Task>& tasks,
                    const PlannerConfig& pc, const PerceptionSetup& setup, std::size_t workers = 1);

}  // namespace nsp
