#pragma once

#include <vector>

#include "nsp/core.hpp"
#include "nsp/dsl.hpp"
#include "nsp/perceiver.hpp"

namespace nsp {

/// A set of ground atoms. When `closed`, it holds the primitive atoms plus
/// exactly the derived atoms they entail.
struct AbstractState {
  AtomSet atoms;
  bool closed = false;

  bool contains(const GroundAtom& a) const { return atoms.count(a) != 0; }
  bool operator==(const AbstractState&) const = default;
};

/// All type-compatible argument tuples for a parameter list, lexicographic by id.
std::vector<std::vector<int>> argument_tuples(const std::vector<std::string>& param_types,
                                              const std::vector<Object>& objects);

/// Strips atoms of derived predicates (and of predicates unknown to `table`).
AtomSet primitive_atoms(const AtomSet& atoms, const PredicateTable& table);

/// Least fixpoint of the derived predicates over `atoms`, stratum by stratum.
/// Derived atoms already present in the input are discarded first. Only
/// predicates whose (re)evaluation can change are revisited each round.
AtomSet close_derived(const AtomSet& atoms, const PredicateTable& table, const std::vector<Object>& objects);

/// Reference implementation: every round re-evaluates every derived tuple of
/// the stratum until nothing changes.
AtomSet close_derived_naive(const AtomSet& atoms, const PredicateTable& table,
                            const std::vector<Object>& objects);

/// Evaluates every primitive predicate on every type-compatible tuple, then
/// closes under the derived predicates.
AbstractState abstract_state(const FeatureState& x, const PredicateTable& table, const TypeTable& types,
                             const Perceiver& perceiver, const PerceptionContext& ctx,
                             const EvalOptions& opts = {});

/// Truth map of `table`'s atoms in `s` over all tuples, used as context for the next step.
std::map<GroundAtom, bool> atom_truth_map(const AbstractState& s, const PredicateTable& table,
                                          const std::vector<Object>& objects);

}  // namespace nsp

namespace nsp {

/// Context for abstracting the state reached by successfully running `skill`
/// from `prev`, whose abstraction under the same predicates was `prev_abstract`.
PerceptionContext next_context(const FeatureState& prev, const GroundSkill& skill,
                               const AbstractState& prev_abstract, const PredicateTable& table);

}  // namespace nsp
