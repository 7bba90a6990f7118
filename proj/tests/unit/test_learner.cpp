#include <doctest.h>

#include "../support/oracles.hpp"

using namespace nsp;

namespace {

std::set<std::string> all_names(const oracle::LearningInstance& inst) {
  std::set<std::string> out;
  for (const auto& s : inst.sigs) out.insert(s.name);
  return out;
}

}  // namespace

TEST_CASE("learn_preconditions matches the exhaustive optimum of J") {
  oracle::Rng rng(7);
  int checked = 0, nonempty = 0;
  while (checked < 100) {
    const auto inst = oracle::random_learning_instance(rng, 10, 0.6);
    const auto table = oracle::table_of(inst.sigs, all_names(inst), inst.types);
    for (const auto& part : cluster_effects(inst.data, table)) {
      std::vector<const AtomSet*> states;
      for (auto m : part.members) states.push_back(&inst.data.positives[m].pre);
      std::vector<std::string> types;
      for (const auto& p : part.params) types.push_back(p.type);
      const auto cands = oracle::candidate_atoms(inst.sigs, types, states, part.bindings);
      REQUIRE(cands.size() == intersection_atoms(part, inst.data).size());
      if (cands.size() > 12) continue;
      std::vector<oracle::Other> others;
      std::set<std::size_t> members(part.members.begin(), part.members.end());
      for (std::size_t i = 0; i < inst.data.positives.size(); ++i) {
        const auto& p = inst.data.positives[i];
        if (p.skill.spec.name == part.skill.name && !members.count(i)) others.push_back({&p.pre, p.skill.args, p.objects.get()});
      }
      for (const auto& n : inst.data.negatives) {
        if (n.skill.spec.name == part.skill.name) others.push_back({&n.state, n.skill.args, n.objects.get()});
      }
      const auto expected = oracle::best_precondition(cands, types, part.members.size(), others);
      std::vector<oracle::PosAtom> got;
      for (const auto& a : learn_preconditions(part, inst.data)) got.push_back(oracle::to_pos(a));
      std::sort(got.begin(), got.end());
      CHECK(got == expected);
      nonempty += expected.empty() ? 0 : 1;
      ++checked;
    }
  }
  CHECK(nonempty >= 20);
}

TEST_CASE("score_predicate_set matches the brute-force scorer") {
  oracle::Rng rng(11);
  std::set<double> seen;
  for (int k = 0; k < 100; ++k) {
    const auto inst = oracle::random_learning_instance(rng, 10, 0.5);
    std::set<std::string> names;
    for (const auto& s : inst.sigs) {
      if (oracle::coin(rng, 0.6)) names.insert(s.name);
    }
    const auto psi = oracle::table_of(inst.sigs, names, inst.types);
    const double got = score_predicate_set(inst.data, psi, -0.01);
    CHECK(got == oracle::brute_force_score(inst, names, -0.01));
    seen.insert(got);
  }
  CHECK(seen.size() >= 20);
}

TEST_CASE("no negatives and no siblings give an empty precondition") {
  oracle::Rng rng(3);
  auto inst = oracle::random_learning_instance(rng, 6, 0.8);
  inst.data.negatives.clear();
  const AbstractPositive first = inst.data.positives.front();
  inst.data.positives = {first, first};
  const auto table = oracle::table_of(inst.sigs, {"P0", "P1", "P2", "P3", "P4"}, inst.types);
  const auto parts = cluster_effects(inst.data, table);
  REQUIRE(parts.size() == 1);
  CHECK(learn_preconditions(parts[0], inst.data).empty());
  LearnerConfig baseline;
  baseline.mode = PreconditionMode::Intersection;
  CHECK(learn_preconditions(parts[0], inst.data, baseline).size() == intersection_atoms(parts[0], inst.data).size());
}

TEST_CASE("optimistic preconditions are a subset of the intersection") {
  oracle::Rng rng(5);
  LearnerConfig baseline;
  baseline.mode = PreconditionMode::Intersection;
  for (int k = 0; k < 50; ++k) {
    const auto inst = oracle::random_learning_instance(rng, 10, 0.6);
    const auto table = oracle::table_of(inst.sigs, all_names(inst), inst.types);
    for (const auto& part : cluster_effects(inst.data, table)) {
      const auto opt = learn_preconditions(part, inst.data);
      const auto all = learn_preconditions(part, inst.data, baseline);
      CHECK(std::includes(all.begin(), all.end(), opt.begin(), opt.end()));
    }
  }
}
