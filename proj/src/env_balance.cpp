#include <algorithm>

#include "nsp/envs.hpp"

namespace nsp {

namespace {

TypeTable balance_types() {
  TypeTable t;
  t.add({"robot", {{"fingers", 0.0, 1.0}}});
  t.add({"block", {}});
  t.add({"plate", {{"size", 0.0, 1.0}}});
  t.add({"machine", {{"on", 0.0, 1.0}}});
  return t;
}

std::vector<SkillSpec> balance_skills() {
  return {{"Pick", {"robot", "block"}},
          {"Stack", {"robot", "block"}},
          {"PutOnPlate", {"robot", "plate"}},
          {"TurnMachineOn", {"robot", "plate", "plate"}}};
}

bool covered(const FeatureState& s, int b) {
  for (const auto& f : s.scene) {
    if (f.relation == "on" && f.args[1] == b) return true;
  }
  return false;
}

bool plate_free(const FeatureState& s, int p) {
  for (const auto& f : s.scene) {
    if (f.relation == "on_plate" && f.args[1] == p) return false;
  }
  return true;
}

int held_block(const FeatureState& s) {
  for (const auto& f : s.scene) {
    if (f.relation == "held") return f.args[0];
  }
  return -1;
}

int plate_count(const FeatureState& s, int p) {
  int n = 0;
  for (int b : s.objects_of_type("block")) {
    int cur = b;
    bool moved = true;
    while (moved) {
      moved = false;
      if (s.holds("on_plate", {cur, p})) {
        ++n;
        break;
      }
      for (const auto& f : s.scene) {
        if (f.relation == "on" && f.args[0] == cur) {
          cur = f.args[1];
          moved = true;
          break;
        }
      }
    }
  }
  return n;
}

class BalanceEnv : public Environment {
public:
  BalanceEnv() : types_(balance_types()), skills_(balance_skills()) {}

  const std::string& name() const override { return name_; }
  const TypeTable& types() const override { return types_; }
  const std::vector<SkillSpec>& skills() const override { return skills_; }

  ExecutionResult step(const FeatureState& s, const GroundSkill& skill) const override {
    const int r = sim::arg(skill, 0);
    const std::string& k = skill.spec.name;
    const int held = held_block(s);
    FeatureState n = s;
    if (k == "TurnMachineOn") {
      const int p1 = sim::arg(skill, 1), p2 = sim::arg(skill, 2);
      if (p1 != p2 && plate_count(s, p1) == plate_count(s, p2)) {
        for (int m : s.objects_of_type("machine")) n.set(types_, m, "on", 1.0);
      }
      return ExecutionResult::ok(std::move(n));
    }
    if (k == "Pick") {
      const int b = sim::arg(skill, 1);
      if (held >= 0 || s.get(types_, r, "fingers") < 0.5 || covered(s, b)) return ExecutionResult::failure();
      for (const auto& f : s.scene) {
        if ((f.relation == "on" || f.relation == "on_plate") && f.args[0] == b) n.retract_fact(f.relation, f.args);
      }
      n.assert_fact("held", {b});
      n.set(types_, r, "fingers", 0.0);
      return ExecutionResult::ok(std::move(n));
    }
    if (held < 0) return ExecutionResult::failure();
    const int dest = sim::arg(skill, 1);
    if (k == "Stack") {
      if (dest == held || covered(s, dest)) return ExecutionResult::failure();
      n.assert_fact("on", {held, dest});
    } else if (k == "PutOnPlate") {
      if (!plate_free(s, dest)) return ExecutionResult::failure();
      n.assert_fact("on_plate", {held, dest});
    } else {
      return ExecutionResult::failure();
    }
    n.retract_fact("held", {held});
    n.set(types_, r, "fingers", 1.0);
    return ExecutionResult::ok(std::move(n));
  }

private:
  std::string name_ = "balance";
  TypeTable types_;
  std::vector<SkillSpec> skills_;
};

class BalanceTasks : public TaskGenerator {
public:
  std::vector<Task> train(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 19, 2); }
  std::vector<Task> test(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 41, 4); }

private:
  std::vector<Task> batch(std::size_t n, std::uint64_t seed, std::uint64_t salt, int small) const {
    std::mt19937_64 rng(mix_hash(seed, salt));
    std::vector<Task> out;
    for (std::size_t i = 0; i < n; ++i) {
      const int count = sim::uniform_int(rng, 0, 1) == 0 ? small : small + 2;
      out.push_back(sample(rng, static_cast<int>(i), count));
    }
    return out;
  }

  Task sample(std::mt19937_64& rng, int id, int count) const {
    std::vector<Object> objs{{"robot", "robot", 0}, {"machine", "machine", 1}, {"plate0", "plate", 2},
                             {"plate1", "plate", 3}};
    for (int i = 0; i < count; ++i) objs.push_back({"block" + std::to_string(i), "block", 4 + i});
    Task task;
    task.id = id;
    task.init = sim::make_state(types_, objs);
    auto& s = task.init;
    s.set(types_, 0, "fingers", 1.0);
    s.set(types_, 2, "size", sim::uniform_real(rng, 0.0, 1.0));
    s.set(types_, 3, "size", sim::uniform_real(rng, 0.0, 1.0));
    int left = count / 2;
    while (left == count / 2) left = sim::uniform_int(rng, 0, count);
    int prev = -1;
    for (int i = 0; i < count; ++i) {
      const int b = 4 + i;
      if (i == 0 || i == left) {
        s.assert_fact("on_plate", {b, i < left ? 2 : 3});
      } else {
        s.assert_fact("on", {b, prev});
      }
      prev = b;
      if (sim::uniform_int(rng, 0, 1) == 1) s.assert_fact("red", {b});
    }
    task.goal = {{"MachineOn", {1}}};
    return task;
  }

  TypeTable types_ = balance_types();
};

}  // namespace

Domain make_balance_domain() {
  Domain d;
  d.spec.name = "balance";
  d.spec.types = balance_types();
  d.spec.skills = balance_skills();
  d.spec.goal_predicates = {"MachineOn"};
  d.spec.initial = parse_model(domain_asset("balance", "initial.model"), d.spec.types);
  d.spec.oracle = parse_model(domain_asset("balance", "oracle.model"), d.spec.types);
  d.spec.pool = domain_asset("balance", "pool.nsp");
  auto& reg = d.spec.registry;
  reg.add("{0} is held", "held");
  reg.add("{0} is directly on top of {1}", "on");
  reg.add("{0} is directly on {1}", "on_plate");
  reg.add("{0} is red", "red");
  d.spec.n_train = 10;
  d.spec.n_abstract = 8;
  d.env = std::make_unique<BalanceEnv>();
  d.tasks = std::make_unique<BalanceTasks>();
  return d;
}

}  // namespace nsp
