#include <doctest.h>

#include "../support/oracles.hpp"
#include "nsp/envs.hpp"
#include "nsp/pddl.hpp"

using namespace nsp;

namespace {

AtomSet known(const AtomSet& atoms, const PredicateTable& table) {
  AtomSet out;
  for (const auto& a : atoms) {
    if (table.contains(a.predicate)) out.insert(a);
  }
  return out;
}

}  // namespace

TEST_CASE("exported axioms reproduce the derived closure of every domain") {
  for (const auto& name : domain_names()) {
    CAPTURE(name);
    const auto d = make_domain(name);
    const Perceiver perceiver(d.spec.registry, {});
    const auto& model = d.spec.oracle;
    for (const auto& task : d.tasks->test(5, 2)) {
      const auto init = abstract_state(task.init, model.predicates, d.spec.types, perceiver, {});
      const auto ex = export_planning_model(model, d.spec.types, task, init, name);
      const auto dom = parse_pddl_domain(ex.domain);
      const auto prob = parse_pddl_problem(ex.problem);
      const auto prim = primitive_atoms(init.atoms, model.predicates);
      CHECK(dom.actions.size() == model.operators.size());
      CHECK(prob.init.size() == prim.size());
      CHECK(prob.goal.size() == task.goal.size());
      CHECK(known(evaluate_axioms(dom, task.objects(), prim), model.predicates) == init.atoms);
    }
  }
}

TEST_CASE("exported axioms agree with close_derived on random tables") {
  oracle::Rng rng(41);
  for (int k = 0; k < 100; ++k) {
    const auto inst = oracle::random_derived_instance(rng, 5);
    const Model model{inst.table, {}};
    const auto text = export_domain(model, inst.types, "rand", &inst.objects);
    const auto dom = parse_pddl_domain(text);
    const auto s = oracle::random_atoms(rng, inst.primitives, inst.objects, 0.4);
    CHECK(known(evaluate_axioms(dom, inst.objects, s), inst.table) == close_derived(s, inst.table, inst.objects));
  }
}

TEST_CASE("counting predicates need the object list") {
  const auto d = make_domain("balance");
  CHECK_THROWS_AS(export_domain(d.spec.oracle, d.spec.types, "balance"), Error);
}

TEST_CASE("malformed PDDL is rejected") {
  CHECK_THROWS_AS(parse_pddl_domain("(define (domain x)"), ParseError);
  CHECK_THROWS_AS(parse_pddl_problem("(foo)"), ParseError);
}
