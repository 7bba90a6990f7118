#include <doctest.h>

#include "../support/oracles.hpp"
#include "nsp/envs.hpp"

using namespace nsp;

TEST_CASE("goal_count_h counts unsatisfied goal atoms") {
  oracle::Rng rng(31);
  const auto sigs = oracle::primitive_vocabulary();
  for (int k = 0; k < 200; ++k) {
    const auto objs = oracle::random_objects(rng, oracle::uniform(rng, 3, 6));
    const AbstractState s{oracle::random_atoms(rng, sigs, objs, 0.5), true};
    const auto goal_set = oracle::random_atoms(rng, sigs, objs, 0.2);
    const std::vector<GroundAtom> goal(goal_set.begin(), goal_set.end());
    std::size_t missing = 0;
    for (const auto& g : goal) missing += s.atoms.count(g) ? 0 : 1;
    CHECK(goal_count_h(s, goal) == missing);
  }
}

TEST_CASE("oracle-model plan streams are valid and duplicate-free") {
  for (const auto& name : domain_names()) {
    CAPTURE(name);
    const auto d = make_domain(name);
    const Perceiver perceiver(d.spec.registry, {});
    PlannerConfig pc;
    pc.n_abstract = 5;
    for (const auto& task : d.tasks->test(4, 1)) {
      const auto init = abstract_state(task.init, d.spec.oracle.predicates, d.spec.types, perceiver, {});
      const auto plans = plan_stream(d.spec.oracle.predicates, d.spec.oracle.operators, task, init, pc);
      std::set<std::vector<GroundSkill>> seen;
      std::size_t last = 0;
      for (const auto& p : plans) {
        CHECK(validate_plan(p, init, task.goal, d.spec.oracle.predicates, task.objects()));
        for (const auto& g : task.goal) CHECK(p.trajectory.back().contains(g));
        std::vector<GroundSkill> skills;
        for (const auto& s : p.steps) skills.push_back(s.skill);
        CHECK(seen.insert(skills).second);
        CHECK(p.steps.size() >= last);
        last = p.steps.size();
      }
      if (task.impossible) {
        CHECK(plans.empty());
      } else {
        CHECK_FALSE(plans.empty());
      }
    }
  }
}

TEST_CASE("plan stream stops at n_abstract plans") {
  const auto d = make_domain("blocks");
  const Perceiver perceiver(d.spec.registry, {});
  PlannerConfig pc;
  pc.n_abstract = 3;
  const auto task = d.tasks->test(1, 0).front();
  const auto init = abstract_state(task.init, d.spec.oracle.predicates, d.spec.types, perceiver, {});
  PlanStream stream(d.spec.oracle.predicates, d.spec.oracle.operators, task, init, pc);
  std::size_t n = 0;
  while (stream.next()) ++n;
  CHECK(n <= 3);
  CHECK(stream.emitted() == n);
  CHECK_FALSE(stream.next());
}
