#include <algorithm>
#include <numeric>

#include "nsp/envs.hpp"

namespace nsp {

namespace {

TypeTable cover_types() {
  TypeTable t;
  t.add({"robot", {{"fingers", 0.0, 1.0}}});
  t.add({"block", {{"lo", 0.0, 1.0}, {"hi", 0.0, 1.0}, {"held", 0.0, 1.0}}});
  t.add({"target", {{"lo", 0.0, 1.0}, {"hi", 0.0, 1.0}}});
  return t;
}

std::vector<SkillSpec> cover_skills() { return {{"Pick", {"block"}}, {"Place", {"block", "target"}}}; }

class CoverEnv : public Environment {
public:
  explicit CoverEnv(bool heavy)
      : name_(heavy ? "cover_heavy" : "cover"), heavy_(heavy), types_(cover_types()), skills_(cover_skills()) {}

  const std::string& name() const override { return name_; }
  const TypeTable& types() const override { return types_; }
  const std::vector<SkillSpec>& skills() const override { return skills_; }

  ExecutionResult step(const FeatureState& s, const GroundSkill& skill) const override {
    const int robot = s.objects_of_type("robot").at(0);
    const int b = sim::arg(skill, 0);
    if (skill.spec.name == "Pick") {
      if (s.get(types_, robot, "fingers") <= 0.5) return ExecutionResult::failure();
      if (heavy_ && s.holds("red", {b})) return ExecutionResult::failure();
      FeatureState n = s;
      n.set(types_, robot, "fingers", 0.0);
      n.set(types_, b, "held", 1.0);
      n.assert_fact("holding", {robot, b});
      return ExecutionResult::ok(std::move(n));
    }
    if (skill.spec.name == "Place") {
      if (!s.holds("holding", {robot, b})) return ExecutionResult::failure();
      const int t = sim::arg(skill, 1);
      FeatureState n = s;
      const double half = (s.get(types_, b, "hi") - s.get(types_, b, "lo")) / 2.0;
      const double mid = (s.get(types_, t, "lo") + s.get(types_, t, "hi")) / 2.0;
      n.set(types_, b, "lo", mid - half);
      n.set(types_, b, "hi", mid + half);
      n.set(types_, b, "held", 0.0);
      n.set(types_, robot, "fingers", 1.0);
      n.retract_fact("holding", {robot, b});
      return ExecutionResult::ok(std::move(n));
    }
    return ExecutionResult::failure();
  }

private:
  std::string name_;
  bool heavy_;
  TypeTable types_;
  std::vector<SkillSpec> skills_;
};

class CoverTasks : public TaskGenerator {
public:
  explicit CoverTasks(bool heavy) : heavy_(heavy), types_(cover_types()) {}

  std::vector<Task> train(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 11, 2, 2); }
  std::vector<Task> test(std::size_t n, std::uint64_t seed) const override { return batch(n, seed, 29, 3, 3); }

private:
  std::vector<Task> batch(std::size_t n, std::uint64_t seed, std::uint64_t salt, int max_goal,
                          int count) const {
    std::mt19937_64 rng(mix_hash(seed, salt));
    std::vector<Task> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample(rng, static_cast<int>(i), count, max_goal));
    return out;
  }

  Task sample(std::mt19937_64& rng, int id, int count, int max_goal) const {
    std::vector<Object> objs{{"robot", "robot", 0}};
    for (int i = 0; i < count; ++i) objs.push_back({"block" + std::to_string(i), "block", 1 + i});
    for (int i = 0; i < count; ++i) objs.push_back({"target" + std::to_string(i), "target", 1 + count + i});
    Task task;
    task.id = id;
    task.init = sim::make_state(types_, objs);
    auto& s = task.init;
    s.set(types_, 0, "fingers", 1.0);

    std::vector<int> slots(static_cast<std::size_t>(2 * count));
    std::iota(slots.begin(), slots.end(), 0);
    for (std::size_t i = slots.size(); i > 1; --i) {
      std::swap(slots[i - 1], slots[static_cast<std::size_t>(sim::uniform_int(rng, 0, static_cast<int>(i) - 1))]);
    }
    const double width = 1.0 / static_cast<double>(slots.size());
    for (int i = 0; i < 2 * count; ++i) {
      const int obj = 1 + i;
      const bool block = i < count;
      const double center = (slots[static_cast<std::size_t>(i)] + 0.5) * width;
      const double half = width * (block ? 0.25 : 0.4);
      s.set(types_, obj, "lo", center - half);
      s.set(types_, obj, "hi", center + half);
    }

    const int k = sim::uniform_int(rng, 1, max_goal);
    std::vector<int> blocks(static_cast<std::size_t>(count)), targets(static_cast<std::size_t>(count));
    std::iota(blocks.begin(), blocks.end(), 1);
    std::iota(targets.begin(), targets.end(), 1 + count);
    for (auto* v : {&blocks, &targets}) {
      for (std::size_t i = v->size(); i > 1; --i) {
        std::swap((*v)[i - 1], (*v)[static_cast<std::size_t>(sim::uniform_int(rng, 0, static_cast<int>(i) - 1))]);
      }
    }
    std::set<int> goal_blocks(blocks.begin(), blocks.begin() + k);

    bool impossible = heavy_ && sim::uniform_int(rng, 0, 1) == 1;
    for (int b = 1; b <= count; ++b) {
      bool red = sim::uniform_int(rng, 0, 1) == 1;
      if (heavy_ && goal_blocks.count(b)) red = false;
      s.assert_fact(red ? "red" : "green", {b});
    }
    if (impossible) {
      const int b = blocks[static_cast<std::size_t>(sim::uniform_int(rng, 0, k - 1))];
      s.retract_fact("green", {b});
      s.assert_fact("red", {b});
    }
    task.impossible = impossible;
    for (int i = 0; i < k; ++i) {
      task.goal.push_back({"Covers", {blocks[static_cast<std::size_t>(i)], targets[static_cast<std::size_t>(i)]}});
    }
    std::sort(task.goal.begin(), task.goal.end());
    return task;
  }

  bool heavy_;
  TypeTable types_;
};

}  // namespace

Domain make_cover_domain(bool heavy) {
  const std::string name = heavy ? "cover_heavy" : "cover";
  Domain d;
  d.spec.name = name;
  d.spec.types = cover_types();
  d.spec.skills = cover_skills();
  d.spec.goal_predicates = {"Covers"};
  d.spec.initial = parse_model(domain_asset(name, "initial.model"), d.spec.types);
  d.spec.oracle = parse_model(domain_asset(name, "oracle.model"), d.spec.types);
  d.spec.pool = domain_asset(name, "pool.nsp");
  d.spec.registry.add("{0} is holding {1}", "holding");
  d.spec.registry.add("{0} is red", "red");
  d.spec.registry.add("{0} is green", "green");
  d.spec.n_train = heavy ? 10 : 5;
  d.spec.n_abstract = 8;
  d.env = std::make_unique<CoverEnv>(heavy);
  d.tasks = std::make_unique<CoverTasks>(heavy);
  return d;
}

}  // namespace nsp
