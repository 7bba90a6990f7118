#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsp/abstraction.hpp"
#include "nsp/core.hpp"
#include "nsp/dsl.hpp"

namespace nsp {

struct LiftedAtom {
  std::string predicate;
  std::vector<std::string> vars;

  auto operator<=>(const LiftedAtom&) const = default;
};

using LiftedAtomSet = std::set<LiftedAtom>;

/// High-level action: a skill annotated with lifted preconditions and effects.
/// Distinct parameters bind distinct objects unless `allow_repeated_args`.
struct HLA {
  std::string name;
  std::vector<Param> params;
  SkillSpec skill;
  std::vector<std::string> skill_args;
  LiftedAtomSet pre;
  LiftedAtomSet add;
  LiftedAtomSet del;
  /// Listed for format compatibility; always empty.
  LiftedAtomSet ignore;
  bool allow_repeated_args = false;

  std::string param_type(const std::string& var) const;
  bool operator==(const HLA&) const = default;
};

/// Checks the structural invariants (typed atoms over parameters, disjoint
/// effects, primitive-only effects). Throws Error.
void validate_hla(const HLA& hla, const PredicateTable& table);

struct GroundHLA {
  const HLA* hla = nullptr;
  std::vector<int> binding;  // parallel to hla->params
  GroundSkill skill;
  AtomSet pre;
  AtomSet add;
  AtomSet del;

  std::string str(const FeatureState& names) const;
};

GroundAtom ground_atom(const LiftedAtom& a, const HLA& hla, const std::vector<int>& binding);
GroundHLA ground(const HLA& hla, const std::vector<int>& binding);

/// Every type-consistent binding of every HLA over `objects`, in HLA order
/// then lexicographic binding order.
std::vector<GroundHLA> ground_all(const std::vector<HLA>& hlas, const std::vector<Object>& objects);

/// Abstract transition: undefined (nullopt) unless pre is contained in s.
std::optional<AbstractState> apply(const AbstractState& s, const GroundHLA& g, const PredicateTable& table,
                                   const std::vector<Object>& objects);

/// True iff two HLAs are equal up to a consistent renaming of parameters
/// (names of the HLAs are ignored).
bool equivalent_up_to_renaming(const HLA& a, const HLA& b);

/// Listing format:
///   NSRT-<name>:
///       Parameters: [?x0:block, ?x1:robot]
///       Preconditions: [GripperOpen(?x1:robot)]
///       Add Effects: [...]
///       Delete Effects: [...]
///       Ignore Effects: []
///       Option Spec: Pick(?x0:block)
std::string print_hla(const HLA& hla);
std::vector<HLA> parse_hlas(const std::string& text);

/// Predicates together with operators. The text form is the predicate
/// declarations followed by the operator listing.
struct Model {
  PredicateTable predicates;
  std::vector<HLA> operators;
};

std::string print_model(const Model& model);
Model parse_model(const std::string& text, const TypeTable& types);

}  // namespace nsp
