#include "nsp/planner.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

namespace nsp {

std::size_t goal_count_h(const AbstractState& s, const std::vector<GroundAtom>& goal) {
  std::size_t missing = 0;
  for (const auto& g : goal) {
    if (!s.contains(g)) ++missing;
  }
  return missing;
}

namespace {

using IdSet = std::vector<int>;  // sorted atom ids

struct IdSetHash {
  std::size_t operator()(const IdSet& v) const noexcept {
    std::size_t h = v.size();
    for (int x : v) h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct Node {
  int parent;
  int op;
  int state;
  int g;
};

struct QueueEntry {
  int f;
  std::size_t order;
  int node;
  bool operator>(const QueueEntry& o) const { return f != o.f ? f > o.f : order > o.order; }
};

}  // namespace

struct PlanStream::Impl {
  const PredicateTable& table;
  const Task& task;
  PlannerConfig config;
  std::vector<GroundHLA> ops;
  std::vector<IdSet> op_pre, op_add, op_del;

  std::map<GroundAtom, int> atom_ids;
  std::vector<GroundAtom> atoms;
  std::vector<bool> derived;
  bool has_derived = false;

  std::unordered_map<IdSet, int, IdSetHash> state_ids;
  std::vector<IdSet> states;
  std::vector<int> expansions;
  std::vector<int> h_values;
  std::unordered_map<IdSet, int, IdSetHash> closure_cache;  // primitive set -> state id

  IdSet goal;
  int per_step = 1;
  std::vector<Node> nodes;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  std::size_t order = 0;
  std::size_t emitted = 0;
  std::set<std::vector<GroundSkill>> emitted_skills;
  SearchStats stats;

  Impl(const PredicateTable& t, const std::vector<HLA>& hlas, const Task& tk, const AbstractState& init,
       PlannerConfig cfg)
      : table(t), task(tk), config(cfg) {
    for (const auto& d : table.decls()) has_derived = has_derived || d.is_derived();
    ops = ground_all(hlas, task.objects());
    for (const auto& op : ops) {
      op_pre.push_back(intern_set(op.pre));
      op_add.push_back(intern_set(op.add));
      op_del.push_back(intern_set(op.del));
    }
    for (const auto& g : task.goal) goal.push_back(intern(g));
    std::sort(goal.begin(), goal.end());
    goal.erase(std::unique(goal.begin(), goal.end()), goal.end());
    // Divide the goal count by the most goal atoms one step can achieve so
    // the heuristic stays consistent and plans come out shortest first.
    bool derived_goal = false;
    for (int g : goal) derived_goal = derived_goal || derived[g];
    if (derived_goal) {
      per_step = std::max<int>(1, static_cast<int>(goal.size()));
    } else {
      for (const auto& add : op_add) {
        int n = 0;
        for (int g : goal) n += std::binary_search(add.begin(), add.end(), g) ? 1 : 0;
        per_step = std::max(per_step, n);
      }
    }
    const int s0 = state_id(intern_set(init.atoms));
    nodes.push_back(Node{-1, -1, s0, 0});
    open.push(QueueEntry{h_values[s0], order++, 0});
  }

  int intern(const GroundAtom& a) {
    auto [it, inserted] = atom_ids.emplace(a, static_cast<int>(atoms.size()));
    if (inserted) {
      atoms.push_back(a);
      derived.push_back(table.is_derived(a.predicate));
    }
    return it->second;
  }

  IdSet intern_set(const AtomSet& s) {
    IdSet out;
    out.reserve(s.size());
    for (const auto& a : s) out.push_back(intern(a));
    std::sort(out.begin(), out.end());
    return out;
  }

  int state_id(const IdSet& s) {
    auto [it, inserted] = state_ids.emplace(s, static_cast<int>(states.size()));
    if (inserted) {
      states.push_back(s);
      expansions.push_back(0);
      int missing = 0;
      for (int g : goal) {
        if (!std::binary_search(s.begin(), s.end(), g)) ++missing;
      }
      h_values.push_back((missing + per_step - 1) / per_step);
    }
    return it->second;
  }

  int successor(const IdSet& s, std::size_t op) {
    IdSet prim;
    prim.reserve(s.size() + op_add[op].size());
    for (int a : s) {
      if (derived[a]) continue;
      if (std::binary_search(op_del[op].begin(), op_del[op].end(), a)) continue;
      prim.push_back(a);
    }
    IdSet merged;
    std::set_union(prim.begin(), prim.end(), op_add[op].begin(), op_add[op].end(), std::back_inserter(merged));
    if (!has_derived) return state_id(merged);
    auto it = closure_cache.find(merged);
    if (it != closure_cache.end()) return it->second;
    AtomSet prim_atoms;
    for (int a : merged) prim_atoms.insert(atoms[a]);
    const int id = state_id(intern_set(close_derived(prim_atoms, table, task.objects())));
    closure_cache.emplace(std::move(merged), id);
    return id;
  }

  AbstractState to_state(int id) const {
    AbstractState s;
    s.closed = true;
    for (int a : states[id]) s.atoms.insert(atoms[a]);
    return s;
  }

  HighLevelPlan reconstruct(int node) const {
    HighLevelPlan plan;
    std::vector<int> chain;
    for (int n = node; n >= 0; n = nodes[n].parent) chain.push_back(n);
    std::reverse(chain.begin(), chain.end());
    for (int n : chain) {
      if (nodes[n].op >= 0) plan.steps.push_back(ops[nodes[n].op]);
      plan.trajectory.push_back(to_state(nodes[n].state));
    }
    return plan;
  }

  std::optional<HighLevelPlan> next() {
    if (emitted >= static_cast<std::size_t>(std::max(config.n_abstract, 0))) return std::nullopt;
    while (!open.empty()) {
      const auto entry = open.top();
      open.pop();
      const Node node = nodes[entry.node];
      if (h_values[node.state] == 0) {
        auto plan = reconstruct(entry.node);
        std::vector<GroundSkill> skills;
        for (const auto& st : plan.steps) skills.push_back(st.skill);
        // Different HLAs of one skill can yield the same action sequence.
        if (!emitted_skills.insert(std::move(skills)).second) continue;
        ++emitted;
        return plan;
      }
      // Plain A* until the first plan; afterwards states may be revisited
      // along other paths so the stream can offer alternatives.
      const int limit = emitted == 0 ? 1 : std::max(config.n_abstract, 1);
      if (expansions[node.state] >= limit) continue;
      if (stats.expanded >= config.node_budget) {
        while (!open.empty()) open.pop();
        break;
      }
      ++expansions[node.state];
      ++stats.expanded;
      const IdSet s = states[node.state];
      for (std::size_t op = 0; op < ops.size(); ++op) {
        if (!std::includes(s.begin(), s.end(), op_pre[op].begin(), op_pre[op].end())) continue;
        const int child = successor(s, op);
        nodes.push_back(Node{entry.node, static_cast<int>(op), child, node.g + 1});
        ++stats.generated;
        open.push(QueueEntry{node.g + 1 + h_values[child], order++, static_cast<int>(nodes.size() - 1)});
      }
    }
    return std::nullopt;
  }
};

PlanStream::PlanStream(const PredicateTable& table, const std::vector<HLA>& hlas, const Task& task,
                       const AbstractState& init, PlannerConfig config)
    : impl_(std::make_unique<Impl>(table, hlas, task, init, config)) {}
PlanStream::~PlanStream() = default;
PlanStream::PlanStream(PlanStream&&) noexcept = default;
PlanStream& PlanStream::operator=(PlanStream&&) noexcept = default;

std::optional<HighLevelPlan> PlanStream::next() { return impl_->next(); }
std::size_t PlanStream::emitted() const { return impl_->emitted; }
const SearchStats& PlanStream::stats() const { return impl_->stats; }
const std::vector<GroundHLA>& PlanStream::ground_operators() const { return impl_->ops; }

std::vector<HighLevelPlan> plan_stream(const PredicateTable& table, const std::vector<HLA>& hlas,
                                       const Task& task, const AbstractState& init, PlannerConfig config,
                                       SearchStats* stats) {
  PlanStream stream(table, hlas, task, init, config);
  std::vector<HighLevelPlan> out;
  while (auto p = stream.next()) out.push_back(std::move(*p));
  if (stats) *stats = stream.stats();
  return out;
}

bool validate_plan(const HighLevelPlan& plan, const AbstractState& init, const std::vector<GroundAtom>& goal,
                   const PredicateTable& table, const std::vector<Object>& objects) {
  if (plan.trajectory.size() != plan.steps.size() + 1) return false;
  if (!(plan.trajectory.front().atoms == init.atoms)) return false;
  AbstractState s = init;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    auto next = apply(s, plan.steps[i], table, objects);
    if (!next || next->atoms != plan.trajectory[i + 1].atoms) return false;
    s = std::move(*next);
  }
  return goal_count_h(s, goal) == 0;
}

std::vector<AbstractState> abstract_trajectory(const Trajectory& t, const PredicateTable& table,
                                               const PerceptionSetup& setup) {
  std::vector<AbstractState> out;
  out.reserve(t.states.size());
  PerceptionContext ctx;
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    if (i > 0) ctx = next_context(t.states[i - 1], t.skills[i - 1], out.back(), table);
    out.push_back(abstract_state(t.states[i], table, *setup.types, *setup.perceiver, ctx, setup.opts));
  }
  return out;
}

ExecutionOutcome execute_hierarchically(const HighLevelPlan& plan, Environment& env, const Task& task,
                                        const PredicateTable& table, const PerceptionSetup& setup) {
  env.reset(task);
  ExecutionOutcome out;
  out.data.task_id = task.id;
  out.data.states.push_back(env.state());
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& skill = plan.steps[i].skill;
    auto result = env.execute(skill);
    if (!result.success()) {
      out.kind = OutcomeKind::Infeasible;
      out.failed_step = i;
      out.data.failed = skill;
      return out;
    }
    out.data.skills.push_back(skill);
    out.data.states.push_back(*result.next);
  }
  const auto abstracted = abstract_trajectory(out.data, table, setup);
  out.kind = goal_count_h(abstracted.back(), task.goal) == 0 ? OutcomeKind::Satisficing : OutcomeKind::NotSatisficing;
  return out;
}

}  // namespace nsp
