#include <algorithm>
#include <numeric>

#include "nsp/envs.hpp"

namespace nsp {

namespace {

TypeTable blocks_types() {
  TypeTable t;
  t.add({"robot", {{"fingers", 0.0, 1.0}}});
  t.add({"block", {{"x", 0.0, 16.0}, {"z", 0.0, 16.0}, {"held", 0.0, 1.0}, {"mass", 0.0, 1.0}}});
  return t;
}

std::vector<SkillSpec> blocks_skills() {
  return {{"Pick", {"robot", "block"}}, {"Stack", {"robot", "block"}}, {"PutOnTable", {"robot"}}};
}

bool clear(const FeatureState& s, int b) {
  for (const auto& f : s.scene) {
    if (f.relation == "on" && f.args[1] == b) return false;
  }
  return true;
}

int held_block(const FeatureState& s, int robot) {
  for (const auto& f : s.scene) {
    if (f.relation == "gripping" && f.args[0] == robot) return f.args[1];
  }
  return -1;
}

class BlocksEnv : public Environment {
public:
  BlocksEnv() : types_(blocks_types()), skills_(blocks_skills()) {}

  const std::string& name() const override { return name_; }
  const TypeTable& types() const override { return types_; }
  const std::vector<SkillSpec>& skills() const override { return skills_; }

  ExecutionResult step(const FeatureState& s, const GroundSkill& skill) const override {
    const int r = sim::arg(skill, 0);
    const int held = held_block(s, r);
    if (skill.spec.name == "Pick") {
      const int b = sim::arg(skill, 1);
      if (held >= 0 || s.get(types_, r, "fingers") < 1.0 || !clear(s, b)) return ExecutionResult::failure();
      FeatureState n = s;
      for (const auto& f : s.scene) {
        if (f.relation == "on" && f.args[0] == b) n.retract_fact("on", f.args);
      }
      n.retract_fact("ontable", {b});
      n.assert_fact("gripping", {r, b});
      n.set(types_, r, "fingers", 0.0);
      n.set(types_, b, "held", 1.0);
      return ExecutionResult::ok(std::move(n));
    }
    if (held < 0) return ExecutionResult::failure();
    FeatureState n = s;
    n.retract_fact("gripping", {r, held});
    n.set(types_, r, "fingers", 1.0);
    n.set(types_, held, "held", 0.0);
    if (skill.spec.name == "Stack") {
      const int t = sim::arg(skill, 1);
      if (t == held || !clear(s, t)) return ExecutionResult::failure();
      n.assert_fact("on", {held, t});
      n.set(types_, held, "x", s.get(types_, t, "x"));
      n.set(types_, held, "z", s.get(types_, t, "z") + 1.0);
      return ExecutionResult::ok(std::move(n));
    }
    if (skill.spec.name == "PutOnTable") {
      std::set<int> used;
      for (int b : s.objects_of_type("block")) {
        if (b != held && s.holds("ontable", {b})) used.insert(static_cast<int>(s.get(types_, b, "x")));
      }
      int x = 0;
      while (used.count(x)) ++x;
      n.assert_fact("ontable", {held});
      n.set(types_, held, "x", x);
      n.set(types_, held, "z", 0.0);
      return ExecutionResult::ok(std::move(n));
    }
    return ExecutionResult::failure();
  }

private:
  std::string name_ = "blocks";
  TypeTable types_;
  std::vector<SkillSpec> skills_;
};

using Piles = std::vector<std::vector<int>>;

Piles random_piles(std::mt19937_64& rng, std::vector<int> blocks) {
  for (std::size_t i = blocks.size(); i > 1; --i) {
    std::swap(blocks[i - 1], blocks[static_cast<std::size_t>(sim::uniform_int(rng, 0, static_cast<int>(i) - 1))]);
  }
  Piles piles;
  for (int b : blocks) {
    if (piles.empty() || sim::uniform_int(rng, 0, 1) == 0) {
      piles.push_back({b});
    } else {
      piles.back().push_back(b);
    }
  }
  return piles;
}

std::vector<GroundAtom> pile_atoms(const Piles& piles) {
  std::vector<GroundAtom> atoms;
  for (const auto& p : piles) {
    atoms.push_back({"OnTable", {p.front()}});
    for (std::size_t i = 1; i < p.size(); ++i) atoms.push_back({"On", {p[i], p[i - 1]}});
  }
  std::sort(atoms.begin(), atoms.end());
  return atoms;
}

class BlocksTasks : public TaskGenerator {
public:
  std::vector<Task> train(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 13, 3); }
  std::vector<Task> test(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 31, 5); }

private:
  std::vector<Task> batch(std::size_t n, std::uint64_t seed, std::uint64_t salt, int min_blocks) const {
    std::mt19937_64 rng(mix_hash(seed, salt));
    std::vector<Task> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(sample(rng, static_cast<int>(i), sim::uniform_int(rng, min_blocks, min_blocks + 1)));
    }
    return out;
  }

  Task sample(std::mt19937_64& rng, int id, int count) const {
    std::vector<Object> objs{{"robot", "robot", 0}};
    std::vector<int> blocks;
    for (int i = 0; i < count; ++i) {
      objs.push_back({"block" + std::to_string(i), "block", 1 + i});
      blocks.push_back(1 + i);
    }
    Task task;
    task.id = id;
    task.init = sim::make_state(types_, objs);
    auto& s = task.init;
    s.set(types_, 0, "fingers", 1.0);
    const Piles init = random_piles(rng, blocks);
    const auto init_atoms = pile_atoms(init);
    for (std::size_t x = 0; x < init.size(); ++x) {
      for (std::size_t z = 0; z < init[x].size(); ++z) {
        const int b = init[x][z];
        s.set(types_, b, "x", static_cast<double>(x));
        s.set(types_, b, "z", static_cast<double>(z));
        if (z == 0) {
          s.assert_fact("ontable", {b});
        } else {
          s.assert_fact("on", {b, init[x][z - 1]});
        }
      }
    }
    for (int b : blocks) {
      s.set(types_, b, "mass", sim::uniform_real(rng, 0.0, 1.0));
      if (sim::uniform_int(rng, 0, 1) == 1) s.assert_fact("red", {b});
    }
    do {
      task.goal = pile_atoms(random_piles(rng, blocks));
    } while (std::includes(init_atoms.begin(), init_atoms.end(), task.goal.begin(), task.goal.end()));
    return task;
  }

  TypeTable types_ = blocks_types();
};

}  // namespace

Domain make_blocks_domain() {
  Domain d;
  d.spec.name = "blocks";
  d.spec.types = blocks_types();
  d.spec.skills = blocks_skills();
  d.spec.goal_predicates = {"On", "OnTable"};
  d.spec.initial = parse_model(domain_asset("blocks", "initial.model"), d.spec.types);
  d.spec.oracle = parse_model(domain_asset("blocks", "oracle.model"), d.spec.types);
  d.spec.pool = domain_asset("blocks", "pool.nsp");
  d.spec.registry.add("{0} is on top of {1}", "on");
  d.spec.registry.add("{0} is on the table", "ontable");
  d.spec.registry.add("{0} is gripping {1}", "gripping");
  d.spec.registry.add("{0} is red", "red");
  d.spec.n_train = 20;
  d.spec.n_abstract = 8;
  d.env = std::make_unique<BlocksEnv>();
  d.tasks = std::make_unique<BlocksTasks>();
  return d;
}

}  // namespace nsp
