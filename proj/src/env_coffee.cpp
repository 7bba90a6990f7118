#include <algorithm>

#include "nsp/envs.hpp"

namespace nsp {

namespace {

TypeTable coffee_types() {
  TypeTable t;
  t.add({"robot", {{"fingers", 0.0, 1.0}}});
  t.add({"jug", {{"rot", 0.0, 1.0}, {"filled", 0.0, 1.0}}});
  t.add({"coffee_machine", {}});
  t.add({"cup", {{"filled", 0.0, 1.0}}});
  return t;
}

std::vector<SkillSpec> coffee_skills() {
  return {{"Twist", {"robot", "jug"}},
          {"PickJug", {"robot", "jug"}},
          {"PlaceJugInMachine", {"robot", "jug", "coffee_machine"}},
          {"TurnMachineOn", {"robot", "coffee_machine"}},
          {"Pour", {"robot", "jug", "cup"}}};
}

// The holding relation is occluded: the gripper hides what it holds.
class CoffeeEnv : public Environment {
public:
  CoffeeEnv() : types_(coffee_types()), skills_(coffee_skills()) {}

  const std::string& name() const override { return name_; }
  const TypeTable& types() const override { return types_; }
  const std::vector<SkillSpec>& skills() const override { return skills_; }

  ExecutionResult step(const FeatureState& s, const GroundSkill& skill) const override {
    const int r = sim::arg(skill, 0);
    const bool open = s.get(types_, r, "fingers") > 0.5;
    const std::string& k = skill.spec.name;
    FeatureState n = s;
    if (k == "Twist") {
      if (!open) return ExecutionResult::failure();
      n.set(types_, sim::arg(skill, 1), "rot", 0.0);
      return ExecutionResult::ok(std::move(n));
    }
    if (k == "PickJug") {
      const int j = sim::arg(skill, 1);
      if (!open || s.get(types_, j, "rot") > 0.1) return ExecutionResult::failure();
      n.set(types_, r, "fingers", 0.0);
      n.occluded.insert(Fact{"holding", {r, j}});
      n.assert_fact("holding", {r, j});
      return ExecutionResult::ok(std::move(n));
    }
    if (k == "PlaceJugInMachine") {
      const int j = sim::arg(skill, 1);
      if (!s.holds("holding", {r, j})) return ExecutionResult::failure();
      n.set(types_, r, "fingers", 1.0);
      n.retract_fact("holding", {r, j});
      n.occluded.erase(Fact{"holding", {r, j}});
      n.assert_fact("inmachine", {j});
      return ExecutionResult::ok(std::move(n));
    }
    if (k == "TurnMachineOn") {
      for (int j : s.objects_of_type("jug")) {
        if (s.holds("inmachine", {j})) n.set(types_, j, "filled", 1.0);
      }
      return ExecutionResult::ok(std::move(n));
    }
    if (k == "Pour") {
      const int j = sim::arg(skill, 1);
      if (!s.holds("holding", {r, j})) return ExecutionResult::failure();
      if (s.get(types_, j, "filled") > 0.5) n.set(types_, sim::arg(skill, 2), "filled", 1.0);
      return ExecutionResult::ok(std::move(n));
    }
    return ExecutionResult::failure();
  }

private:
  std::string name_ = "coffee";
  TypeTable types_;
  std::vector<SkillSpec> skills_;
};

class CoffeeTasks : public TaskGenerator {
public:
  std::vector<Task> train(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 17, 1, 1); }
  std::vector<Task> test(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 37, 2, 3); }

private:
  std::vector<Task> batch(std::size_t n, std::uint64_t seed, std::uint64_t salt, int lo, int hi) const {
    std::mt19937_64 rng(mix_hash(seed, salt));
    std::vector<Task> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(sample(rng, static_cast<int>(i), sim::uniform_int(rng, lo, hi)));
    }
    return out;
  }

  Task sample(std::mt19937_64& rng, int id, int cups) const {
    std::vector<Object> objs{{"robot", "robot", 0}, {"jug", "jug", 1}, {"machine", "coffee_machine", 2}};
    for (int i = 0; i < cups; ++i) objs.push_back({"cup" + std::to_string(i), "cup", 3 + i});
    Task task;
    task.id = id;
    task.init = sim::make_state(types_, objs);
    auto& s = task.init;
    s.set(types_, 0, "fingers", 1.0);
    if (sim::uniform_int(rng, 0, 1) == 1) s.set(types_, 1, "rot", sim::uniform_real(rng, 0.3, 1.0));
    s.assert_fact("handle", {1});
    if (sim::uniform_int(rng, 0, 1) == 1) s.assert_fact("blue", {2});
    for (int i = 0; i < cups; ++i) {
      if (sim::uniform_int(rng, 0, 1) == 1) s.assert_fact("ceramic", {3 + i});
      task.goal.push_back({"CupFilled", {3 + i}});
    }
    return task;
  }

  TypeTable types_ = coffee_types();
};

}  // namespace

Domain make_coffee_domain() {
  Domain d;
  d.spec.name = "coffee";
  d.spec.types = coffee_types();
  d.spec.skills = coffee_skills();
  d.spec.goal_predicates = {"CupFilled"};
  d.spec.initial = parse_model(domain_asset("coffee", "initial.model"), d.spec.types);
  d.spec.oracle = parse_model(domain_asset("coffee", "oracle.model"), d.spec.types);
  d.spec.pool = domain_asset("coffee", "pool.nsp");
  auto& reg = d.spec.registry;
  reg.add("{0} is holding {1}", "holding");
  reg.add("{0} is placed inside the coffee machine", "inmachine");
  reg.add("{0} is ceramic", "ceramic");
  reg.add("{0} is blue", "blue");
  reg.add("{0} has a handle", "handle");
  reg.add_nominal_effect({"PickJug", "holding", {0, 1}, true});
  reg.add_nominal_effect({"PlaceJugInMachine", "holding", {0, 1}, false});
  d.spec.n_train = 5;
  d.spec.n_abstract = 100;
  d.env = std::make_unique<CoffeeEnv>();
  d.tasks = std::make_unique<CoffeeTasks>();
  return d;
}

}  // namespace nsp
