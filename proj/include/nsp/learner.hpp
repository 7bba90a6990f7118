#pragma once

#include <bitset>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "nsp/dataset.hpp"
#include "nsp/planner.hpp"
#include "nsp/worldmodel.hpp"

namespace nsp {

using ObjectList = std::shared_ptr<const std::vector<Object>>;

struct AbstractPositive {
  AtomSet pre;
  GroundSkill skill;
  AtomSet post;
  ObjectList objects;
};

struct AbstractNegative {
  AtomSet state;
  GroundSkill skill;
  ObjectList objects;
};

/// D_Psi: the transition dataset seen through a predicate set.
struct AbstractDataset {
  std::vector<AbstractPositive> positives;
  std::vector<AbstractNegative> negatives;

  std::size_t size() const { return positives.size() + negatives.size(); }
  /// Keeps only atoms whose predicate is in `names`.
  AbstractDataset restrict(const std::set<std::string>& names) const;
};

AbstractDataset abstract_dataset(const TransitionDataset& data, const PredicateTable& table,
                                 const PerceptionSetup& setup);

/// Transitions of one skill whose lifted effects unify. Parameters are the
/// skill's arguments followed by the extra objects mentioned in the effects.
struct EffectPartition {
  SkillSpec skill;
  std::vector<Param> params;
  std::vector<std::string> skill_args;
  LiftedAtomSet add;
  LiftedAtomSet del;
  std::vector<std::size_t> members;          // indices into positives
  std::vector<std::vector<int>> bindings;    // object ids per parameter, per member
};

std::vector<EffectPartition> cluster_effects(const AbstractDataset& data, const PredicateTable& table);

/// Lifted atoms over the partition's parameters true in every member pre-state,
/// in atom order.
std::vector<LiftedAtom> intersection_atoms(const EffectPartition& part, const AbstractDataset& data);

constexpr std::size_t kMaxPreconditionAtoms = 256;
using AtomMask = std::bitset<kMaxPreconditionAtoms>;

/// J(Pre) restated over candidate bitmasks. Members satisfy every subset of
/// the candidates, so only the other transitions of the skill need groundings:
/// `others[k]` lists, for each grounding of the HLA on item k, which
/// candidates hold there.
struct PreconditionProblem {
  std::vector<LiftedAtom> candidates;
  std::size_t total = 0;
  std::size_t members = 0;
  std::vector<std::vector<AtomMask>> others;
  /// Multiplicity of each entry of `others` (identical items are merged).
  std::vector<std::size_t> weights;
};

PreconditionProblem precondition_problem(const EffectPartition& part, const AbstractDataset& data);
double precondition_score(const PreconditionProblem& p, const AtomMask& pre, double alpha);

/// Scores within this distance count as equal; ties go to the smaller set,
/// then to the set whose sorted candidate indices are lexicographically least.
constexpr double kScoreTolerance = 1e-12;

AtomMask solve_exhaustive(const PreconditionProblem& p, double alpha);
AtomMask solve_greedy(const PreconditionProblem& p, double alpha);

enum class PreconditionMode { Optimistic, Intersection };

struct LearnerConfig {
  double alpha = -0.01;
  PreconditionMode mode = PreconditionMode::Optimistic;
  std::size_t exhaustive_limit = 12;
};

LiftedAtomSet learn_preconditions(const EffectPartition& part, const AbstractDataset& data,
                                  const LearnerConfig& cfg = {});

/// One HLA per partition, named Op0, Op1, ... in partition order.
std::vector<HLA> learn_hlas(const AbstractDataset& data, const PredicateTable& table, const LearnerConfig& cfg = {});

struct ClassificationCounts {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// A positive counts when some ground HLA of its skill applies and every
/// applicable one predicts the observed effects; a negative counts when none applies.
ClassificationCounts classify(const std::vector<HLA>& hlas, const AbstractDataset& data,
                              const PredicateTable& table);

/// J(Psi): learns HLAs from `data` restricted to `psi`, returns accuracy + alpha_sel |psi|.
double score_predicate_set(const AbstractDataset& data, const PredicateTable& psi, double alpha_sel,
                           const LearnerConfig& cfg = {});

/// An executed plan that reached its goal, abstracted under the full candidate table.
struct SatisficingPlan {
  int task_id = -1;
  std::vector<AtomSet> states;
  std::vector<GroundSkill> skills;
  std::vector<GroundAtom> goal;
  ObjectList objects;
};

/// Fraction of plans whose skills can be replayed step by step with HLAs
/// learned from `data` under `psi`, reaching the goal in the predicted state.
double plan_consistency(const std::vector<HLA>& hlas, const std::vector<SatisficingPlan>& plans,
                        const PredicateTable& psi);

struct SelectionConfig {
  double alpha_sel = -0.01;
  std::size_t k_switch = 1;
  /// Best-first expansions; 0 means one per candidate.
  std::size_t max_expansions = 0;
  LearnerConfig learner;
};

/// `psi` closed under the predicates its derived members read.
std::set<std::string> dependency_closure(const std::set<std::string>& psi, const PredicateTable& candidates);

/// Greedy best-first search from `base` (the initial predicates), one candidate added
/// per step (with whatever it reads); returns the best-scoring set visited.
PredicateTable select_predicates(const PredicateTable& candidates, const AbstractDataset& data,
                                 const std::set<std::string>& base, const TypeTable& types,
                                 const std::vector<SatisficingPlan>& plans, const SelectionConfig& cfg);

/// Score used by select_predicates for a given subset.
double selection_score(const PredicateTable& psi, const AbstractDataset& data,
                       const std::vector<SatisficingPlan>& plans, const SelectionConfig& cfg);

}  // namespace nsp
