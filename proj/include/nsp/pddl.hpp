#pragma once

#include <map>
#include <string>
#include <vector>

#include "nsp/sexpr.hpp"
#include "nsp/worldmodel.hpp"

namespace nsp {

// PDDL export of a learned model. Dialect: :typing, STRIPS actions with
// negative equality guards, and :derived axioms (with or/not/exists/forall).
//
// Counting bodies, (count= (P ?x *) (Q ?y *)), have no first-order form; for a
// fixed object set they are inlined as
//   AND_k ( atleast_k(P) <-> atleast_k(Q) ),   k = 1..n
// where atleast_k is an auxiliary axiom "k pairwise distinct witnesses exist".

struct PlanningExport {
  std::string domain;
  std::string problem;
};

/// Domain text. `objects` is needed only when some derived predicate counts;
/// without it such a model throws Error.
std::string export_domain(const Model& model, const TypeTable& types, const std::string& name,
                          const std::vector<Object>* objects = nullptr);

/// Problem text: objects, the primitive atoms of `init`, and the goal.
std::string export_problem(const Model& model, const Task& task, const AbstractState& init,
                           const std::string& domain_name);

PlanningExport export_planning_model(const Model& model, const TypeTable& types, const Task& task,
                                     const AbstractState& init, const std::string& name = "nsp");

struct PddlAxiom {
  std::string name;
  std::vector<Param> params;
  SExpr body;
};

struct PddlAction {
  std::string name;
  std::vector<Param> params;
  LiftedAtomSet pre;
  /// Parameter pairs guarded by (not (= ?a ?b)).
  std::set<std::pair<std::string, std::string>> distinct;
  LiftedAtomSet add;
  LiftedAtomSet del;
};

struct PddlDomain {
  std::string name;
  std::vector<std::string> types;
  std::map<std::string, std::vector<std::string>> predicates;
  std::vector<PddlAxiom> axioms;
  std::vector<PddlAction> actions;
};

struct PddlProblem {
  std::string name;
  std::string domain;
  /// Ids are positions in the :objects list.
  std::vector<Object> objects;
  AtomSet init;
  std::vector<GroundAtom> goal;
};

/// Parses the dialect written by export_domain. Throws ParseError.
PddlDomain parse_pddl_domain(const std::string& text);
PddlProblem parse_pddl_problem(const std::string& text);

/// Closes `atoms` (primitive atoms; any axiom-defined atoms are dropped first)
/// under the domain's axioms, stratum by stratum. Objects are matched by id.
AtomSet evaluate_axioms(const PddlDomain& domain, const std::vector<Object>& objects, const AtomSet& atoms);

}  // namespace nsp
