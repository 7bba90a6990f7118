#include "nsp/learner.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <functional>
#include <queue>
#include <optional>
#include <numeric>

namespace nsp {

namespace {

const Object& object_by_id(const std::vector<Object>& objects, int id) {
  auto it = std::lower_bound(objects.begin(), objects.end(), id, [](const Object& o, int v) { return o.id < v; });
  if (it == objects.end() || it->id != id) throw Error("unknown object id " + std::to_string(id));
  return *it;
}

std::string var_name(std::size_t i) { return "?x" + std::to_string(i); }

void split_delta(const AtomSet& pre, const AtomSet& post, const PredicateTable& table, AtomSet& add, AtomSet& del) {
  for (const auto& a : post) {
    if (!table.is_derived(a.predicate) && !pre.count(a)) add.insert(a);
  }
  for (const auto& a : pre) {
    if (!table.is_derived(a.predicate) && !post.count(a)) del.insert(a);
  }
}

LiftedAtom lift(const GroundAtom& a, const std::map<int, std::string>& vars) {
  LiftedAtom out{a.predicate, {}};
  for (int o : a.args) out.vars.push_back(vars.at(o));
  return out;
}

/// Bindings of `params` that agree with the ground skill arguments and bind
/// the remaining parameters injectively to type-compatible objects.
std::vector<std::vector<int>> consistent_bindings(const std::vector<Param>& params,
                                                  const std::vector<std::string>& skill_args,
                                                  const std::vector<int>& ground_args,
                                                  const std::vector<Object>& objects) {
  std::vector<int> binding(params.size(), -1);
  if (skill_args.size() != ground_args.size()) return {};
  for (std::size_t i = 0; i < skill_args.size(); ++i) {
    std::size_t k = 0;
    while (k < params.size() && params[k].var != skill_args[i]) ++k;
    if (k == params.size()) return {};
    if (binding[k] != -1 && binding[k] != ground_args[i]) return {};
    auto it = std::find_if(objects.begin(), objects.end(), [&](const Object& o) { return o.id == ground_args[i]; });
    if (it == objects.end() || it->type != params[k].type) return {};
    binding[k] = ground_args[i];
  }
  std::vector<int> used;
  for (int b : binding) {
    if (b == -1) continue;
    if (std::find(used.begin(), used.end(), b) != used.end()) return {};
    used.push_back(b);
  }
  std::vector<std::vector<int>> out;
  std::vector<int> cur = binding;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == params.size()) {
      out.push_back(cur);
      return;
    }
    if (binding[k] != -1) return rec(k + 1);
    for (const auto& o : objects) {
      if (o.type != params[k].type) continue;
      if (std::find(cur.begin(), cur.begin() + static_cast<long>(k), o.id) != cur.begin() + static_cast<long>(k)) continue;
      if (std::find(binding.begin() + static_cast<long>(k), binding.end(), o.id) != binding.end()) continue;
      cur[k] = o.id;
      rec(k + 1);
      cur[k] = -1;
    }
  };
  rec(0);
  return out;
}

GroundAtom ground_lifted(const LiftedAtom& a, const std::vector<Param>& params, const std::vector<int>& binding) {
  GroundAtom g{a.predicate, {}};
  for (const auto& v : a.vars) {
    std::size_t k = 0;
    while (k < params.size() && params[k].var != v) ++k;
    if (k == params.size()) throw Error("unbound variable " + v);
    g.args.push_back(binding[k]);
  }
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Abstraction of the dataset

AbstractDataset AbstractDataset::restrict(const std::set<std::string>& names) const {
  auto keep = [&](const AtomSet& s) {
    AtomSet out;
    for (const auto& a : s) {
      if (names.count(a.predicate)) out.insert(out.end(), a);
    }
    return out;
  };
  AbstractDataset out;
  out.positives.reserve(positives.size());
  for (const auto& p : positives) out.positives.push_back({keep(p.pre), p.skill, keep(p.post), p.objects});
  out.negatives.reserve(negatives.size());
  for (const auto& n : negatives) out.negatives.push_back({keep(n.state), n.skill, n.objects});
  return out;
}

AbstractDataset abstract_dataset(const TransitionDataset& data, const PredicateTable& table,
                                 const PerceptionSetup& setup) {
  AbstractDataset out;
  for (const auto& t : data.trajectories) {
    if (t.states.empty()) continue;
    auto objects = std::make_shared<const std::vector<Object>>(t.states.front().objects);
    const auto states = abstract_trajectory(t, table, setup);
    for (std::size_t i = 0; i < t.skills.size(); ++i) {
      out.positives.push_back({states[i].atoms, t.skills[i], states[i + 1].atoms, objects});
    }
    if (t.failed) out.negatives.push_back({states.back().atoms, *t.failed, objects});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clustering

std::vector<EffectPartition> cluster_effects(const AbstractDataset& data, const PredicateTable& table) {
  std::vector<EffectPartition> parts;
  for (std::size_t idx = 0; idx < data.positives.size(); ++idx) {
    const auto& p = data.positives[idx];
    const auto& objects = *p.objects;
    AtomSet add, del;
    split_delta(p.pre, p.post, table, add, del);

    // Skill arguments take the first variables; other objects in the
    // effects follow in first-occurrence order.
    std::map<int, std::string> vars;
    std::vector<Param> params;
    std::vector<std::string> skill_args;
    for (std::size_t i = 0; i < p.skill.args.size(); ++i) {
      const int o = p.skill.args[i];
      if (!vars.count(o)) {
        vars[o] = var_name(params.size());
        params.push_back({vars[o], object_by_id(objects, o).type});
      }
      skill_args.push_back(vars[o]);
    }
    const std::size_t n_skill = params.size();
    std::vector<int> extras;
    for (const auto* s : {&add, &del}) {
      for (const auto& a : *s) {
        for (int o : a.args) {
          if (!vars.count(o)) {
            vars[o] = var_name(params.size());
            params.push_back({vars[o], object_by_id(objects, o).type});
            extras.push_back(o);
          }
        }
      }
    }

    bool placed = false;
    for (auto& part : parts) {
      if (part.skill.name != p.skill.spec.name || part.params.size() != params.size() ||
          part.add.size() != add.size() || part.del.size() != del.size() || part.skill_args != skill_args) {
        continue;
      }
      bool skill_types_ok = true;
      for (std::size_t k = 0; k < n_skill; ++k) skill_types_ok = skill_types_ok && part.params[k].type == params[k].type;
      if (!skill_types_ok) continue;
      std::vector<std::size_t> perm(extras.size());
      std::iota(perm.begin(), perm.end(), 0);
      do {
        bool ok = true;
        std::map<int, std::string> trial;
        for (const auto& [o, v] : vars) {
          if (std::find(extras.begin(), extras.end(), o) == extras.end()) trial[o] = v;
        }
        for (std::size_t e = 0; e < extras.size() && ok; ++e) {
          const auto& slot = part.params[n_skill + perm[e]];
          ok = slot.type == object_by_id(objects, extras[e]).type;
          trial[extras[e]] = slot.var;
        }
        if (!ok) continue;
        LiftedAtomSet la, ld;
        for (const auto& a : add) la.insert(lift(a, trial));
        for (const auto& a : del) ld.insert(lift(a, trial));
        if (la != part.add || ld != part.del) continue;
        std::vector<int> binding(params.size());
        for (const auto& [o, v] : trial) {
          for (std::size_t k = 0; k < part.params.size(); ++k) {
            if (part.params[k].var == v) binding[k] = o;
          }
        }
        part.members.push_back(idx);
        part.bindings.push_back(std::move(binding));
        placed = true;
        break;
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (placed) break;
    }
    if (placed) continue;

    EffectPartition part;
    part.skill = p.skill.spec;
    part.params = params;
    part.skill_args = skill_args;
    for (const auto& a : add) part.add.insert(lift(a, vars));
    for (const auto& a : del) part.del.insert(lift(a, vars));
    std::vector<int> binding(params.size());
    for (const auto& [o, v] : vars) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].var == v) binding[k] = o;
      }
    }
    part.members.push_back(idx);
    part.bindings.push_back(std::move(binding));
    parts.push_back(std::move(part));
  }
  return parts;
}

std::vector<LiftedAtom> intersection_atoms(const EffectPartition& part, const AbstractDataset& data) {
  if (part.members.empty()) throw Error("empty partition");
  std::map<int, std::string> vars;
  for (std::size_t k = 0; k < part.params.size(); ++k) vars[part.bindings[0][k]] = part.params[k].var;
  std::vector<LiftedAtom> out;
  for (const auto& a : data.positives[part.members[0]].pre) {
    bool inside = std::all_of(a.args.begin(), a.args.end(), [&](int o) { return vars.count(o) != 0; });
    if (!inside) continue;
    const auto lifted = lift(a, vars);
    bool everywhere = true;
    for (std::size_t m = 1; m < part.members.size() && everywhere; ++m) {
      everywhere = data.positives[part.members[m]].pre.count(ground_lifted(lifted, part.params, part.bindings[m])) != 0;
    }
    if (everywhere) out.push_back(lifted);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Preconditions

PreconditionProblem precondition_problem(const EffectPartition& part, const AbstractDataset& data) {
  PreconditionProblem p;
  p.candidates = intersection_atoms(part, data);
  if (p.candidates.size() > kMaxPreconditionAtoms) throw Error("too many precondition candidates");
  p.members = part.members.size();

  std::map<std::string, std::size_t> merged;
  std::vector<std::vector<AtomMask>> order;
  std::vector<std::string> order_keys;
  auto add_item = [&](const AtomSet& s, const GroundSkill& skill, const std::vector<Object>& objects) {
    ++p.total;
    std::vector<AtomMask> masks;
    for (const auto& b : consistent_bindings(part.params, part.skill_args, skill.args, objects)) {
      AtomMask m;
      for (std::size_t i = 0; i < p.candidates.size(); ++i) {
        if (s.count(ground_lifted(p.candidates[i], part.params, b))) m.set(i);
      }
      masks.push_back(m);
    }
    std::vector<std::string> keys;
    for (const auto& m : masks) keys.push_back(m.to_string());
    std::sort(keys.begin(), keys.end());
    std::string key;
    for (const auto& k : keys) key += k + "|";
    auto [it, inserted] = merged.emplace(key, 0);
    if (inserted) {
      order.push_back(masks);
      order_keys.push_back(key);
    }
    ++it->second;
  };
  std::set<std::size_t> members(part.members.begin(), part.members.end());
  for (std::size_t i = 0; i < data.positives.size(); ++i) {
    const auto& pos = data.positives[i];
    if (pos.skill.spec.name != part.skill.name) continue;
    if (members.count(i)) {
      ++p.total;
      continue;
    }
    add_item(pos.pre, pos.skill, *pos.objects);
  }
  for (const auto& neg : data.negatives) {
    if (neg.skill.spec.name == part.skill.name) add_item(neg.state, neg.skill, *neg.objects);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    p.weights.push_back(merged.at(order_keys[k]));
    p.others.push_back(std::move(order[k]));
  }
  return p;
}

double precondition_score(const PreconditionProblem& p, const AtomMask& pre, double alpha) {
  std::size_t correct = p.members;
  for (std::size_t k = 0; k < p.others.size(); ++k) {
    bool covered = false;
    for (const auto& m : p.others[k]) {
      if ((pre & ~m).none()) {
        covered = true;
        break;
      }
    }
    if (!covered) correct += p.weights[k];
  }
  const double n = static_cast<double>(std::max<std::size_t>(p.total, 1));
  return static_cast<double>(correct) / n + alpha * static_cast<double>(pre.count());
}

namespace {

/// Strict preference between two candidate preconditions.
bool better(double ja, const AtomMask& a, double jb, const AtomMask& b) {
  if (ja > jb + kScoreTolerance) return true;
  if (jb > ja + kScoreTolerance) return false;
  if (a.count() != b.count()) return a.count() < b.count();
  for (std::size_t i = 0; i < kMaxPreconditionAtoms; ++i) {
    if (a[i] != b[i]) return a[i];
  }
  return false;
}

}  // namespace

AtomMask solve_exhaustive(const PreconditionProblem& p, double alpha) {
  const std::size_t n = p.candidates.size();
  if (n > 20) throw Error("exhaustive precondition search over too many atoms");
  AtomMask best;
  double best_j = precondition_score(p, best, alpha);
  for (std::uint32_t bits = 1; bits < (1u << n); ++bits) {
    AtomMask m;
    for (std::size_t i = 0; i < n; ++i) {
      if (bits & (1u << i)) m.set(i);
    }
    const double j = precondition_score(p, m, alpha);
    if (better(j, m, best_j, best)) {
      best = m;
      best_j = j;
    }
  }
  return best;
}

AtomMask solve_greedy(const PreconditionProblem& p, double alpha) {
  AtomMask cur;
  for (std::size_t i = 0; i < p.candidates.size(); ++i) cur.set(i);
  double cur_j = precondition_score(p, cur, alpha);
  while (cur.any()) {
    std::optional<std::size_t> pick;
    double pick_j = 0;
    for (std::size_t i = 0; i < p.candidates.size(); ++i) {
      if (!cur[i]) continue;
      AtomMask next = cur;
      next.reset(i);
      const double j = precondition_score(p, next, alpha);
      if (!pick || j > pick_j + kScoreTolerance) {
        pick = i;
        pick_j = j;
      }
    }
    if (pick_j + kScoreTolerance < cur_j) break;
    cur.reset(*pick);
    cur_j = pick_j;
  }
  return cur;
}

LiftedAtomSet learn_preconditions(const EffectPartition& part, const AbstractDataset& data, const LearnerConfig& cfg) {
  if (part.members.empty()) throw Error("empty partition");
  if (cfg.mode == PreconditionMode::Intersection) {
    const auto atoms = intersection_atoms(part, data);
    return LiftedAtomSet(atoms.begin(), atoms.end());
  }
  const auto problem = precondition_problem(part, data);
  const AtomMask best = problem.candidates.size() <= cfg.exhaustive_limit ? solve_exhaustive(problem, cfg.alpha)
                                                                          : solve_greedy(problem, cfg.alpha);
  LiftedAtomSet out;
  for (std::size_t i = 0; i < problem.candidates.size(); ++i) {
    if (best[i]) out.insert(problem.candidates[i]);
  }
  return out;
}

std::vector<HLA> learn_hlas(const AbstractDataset& data, const PredicateTable& table, const LearnerConfig& cfg) {
  std::vector<HLA> out;
  for (const auto& part : cluster_effects(data, table)) {
    HLA h;
    h.name = "Op" + std::to_string(out.size());
    h.params = part.params;
    h.skill = part.skill;
    h.skill_args = part.skill_args;
    h.pre = learn_preconditions(part, data, cfg);
    h.add = part.add;
    h.del = part.del;
    out.push_back(std::move(h));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Predicate-set scoring

namespace {

struct Applicable {
  const HLA* hla;
  std::vector<int> binding;
};

std::vector<Applicable> applicable(const std::vector<HLA>& hlas, const AtomSet& s, const GroundSkill& skill,
                                   const std::vector<Object>& objects) {
  std::vector<Applicable> out;
  for (const auto& h : hlas) {
    if (h.skill.name != skill.spec.name) continue;
    for (auto& b : consistent_bindings(h.params, h.skill_args, skill.args, objects)) {
      bool ok = true;
      for (const auto& a : h.pre) {
        if (!s.count(ground_lifted(a, h.params, b))) {
          ok = false;
          break;
        }
      }
      if (ok) out.push_back({&h, std::move(b)});
    }
  }
  return out;
}

bool predicts(const Applicable& a, const AtomSet& add, const AtomSet& del) {
  AtomSet ga, gd;
  for (const auto& x : a.hla->add) ga.insert(ground_lifted(x, a.hla->params, a.binding));
  for (const auto& x : a.hla->del) gd.insert(ground_lifted(x, a.hla->params, a.binding));
  return ga == add && gd == del;
}

}  // namespace

ClassificationCounts classify(const std::vector<HLA>& hlas, const AbstractDataset& data, const PredicateTable& table) {
  ClassificationCounts c;
  for (const auto& p : data.positives) {
    ++c.total;
    AtomSet add, del;
    split_delta(p.pre, p.post, table, add, del);
    const auto apps = applicable(hlas, p.pre, p.skill, *p.objects);
    const bool ok = !apps.empty() &&
                    std::all_of(apps.begin(), apps.end(), [&](const Applicable& a) { return predicts(a, add, del); });
    if (ok) ++c.correct;
  }
  for (const auto& n : data.negatives) {
    ++c.total;
    if (applicable(hlas, n.state, n.skill, *n.objects).empty()) ++c.correct;
  }
  return c;
}

double score_predicate_set(const AbstractDataset& data, const PredicateTable& psi, double alpha_sel,
                           const LearnerConfig& cfg) {
  const auto names = psi.names();
  const auto restricted = data.restrict(std::set<std::string>(names.begin(), names.end()));
  const auto hlas = learn_hlas(restricted, psi, cfg);
  return classify(hlas, restricted, psi).accuracy() + alpha_sel * static_cast<double>(psi.size());
}

double plan_consistency(const std::vector<HLA>& hlas, const std::vector<SatisficingPlan>& plans,
                        const PredicateTable& psi) {
  if (plans.empty()) return 1.0;
  const auto names = psi.names();
  const std::set<std::string> keep(names.begin(), names.end());
  auto restrict = [&](const AtomSet& s) {
    AtomSet out;
    for (const auto& a : s) {
      if (keep.count(a.predicate)) out.insert(out.end(), a);
    }
    return out;
  };
  std::size_t valid = 0;
  for (const auto& plan : plans) {
    AtomSet s = restrict(plan.states.front());
    bool ok = true;
    for (std::size_t i = 0; i < plan.skills.size() && ok; ++i) {
      const auto apps = applicable(hlas, s, plan.skills[i], *plan.objects);
      if (apps.empty()) {
        ok = false;
        break;
      }
      const AtomSet observed = restrict(plan.states[i + 1]);
      std::optional<AtomSet> chosen;
      for (const auto& a : apps) {
        AtomSet next = primitive_atoms(s, psi);
        for (const auto& x : a.hla->del) next.erase(ground_lifted(x, a.hla->params, a.binding));
        for (const auto& x : a.hla->add) next.insert(ground_lifted(x, a.hla->params, a.binding));
        next = close_derived(next, psi, *plan.objects);
        if (!chosen) chosen = next;
        if (next == observed) {
          chosen = std::move(next);
          break;
        }
      }
      s = std::move(*chosen);
    }
    if (ok && std::all_of(plan.goal.begin(), plan.goal.end(), [&](const GroundAtom& g) { return s.count(g) != 0; })) {
      ++valid;
    }
  }
  return static_cast<double>(valid) / static_cast<double>(plans.size());
}

std::set<std::string> dependency_closure(const std::set<std::string>& psi, const PredicateTable& candidates) {
  std::set<std::string> out;
  std::vector<std::string> todo(psi.begin(), psi.end());
  while (!todo.empty()) {
    const auto name = todo.back();
    todo.pop_back();
    if (!out.insert(name).second) continue;
    if (const auto* d = candidates.find(name)) {
      for (const auto& r : referenced_predicates(*d)) todo.push_back(r);
    }
  }
  return out;
}

double selection_score(const PredicateTable& psi, const AbstractDataset& data,
                       const std::vector<SatisficingPlan>& plans, const SelectionConfig& cfg) {
  const auto names = psi.names();
  const auto restricted = data.restrict(std::set<std::string>(names.begin(), names.end()));
  const auto hlas = learn_hlas(restricted, psi, cfg.learner);
  double score = classify(hlas, restricted, psi).accuracy();
  if (plans.size() >= cfg.k_switch) score += plan_consistency(hlas, plans, psi);
  return score + cfg.alpha_sel * static_cast<double>(psi.size());
}

PredicateTable select_predicates(const PredicateTable& candidates, const AbstractDataset& data,
                                 const std::set<std::string>& base, const TypeTable& types,
                                 const std::vector<SatisficingPlan>& plans, const SelectionConfig& cfg) {
  std::set<std::string> start;
  for (const auto& g : base) {
    if (candidates.contains(g)) start.insert(g);
  }
  start = dependency_closure(start, candidates);
  const std::size_t limit = cfg.max_expansions ? cfg.max_expansions : candidates.size();

  // Best-first over subsets: highest score first, FIFO among equal scores.
  struct Node {
    double score;
    std::size_t order;
    std::set<std::string> names;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (std::abs(a.score - b.score) > kScoreTolerance) return a.score < b.score;
    return a.order > b.order;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  std::set<std::set<std::string>> seen{start};
  std::size_t order = 0;
  Node best{selection_score(candidates.subset(start, types), data, plans, cfg), order++, start};
  open.push(best);
  for (std::size_t expansions = 0; expansions < limit && !open.empty(); ++expansions) {
    const Node node = open.top();
    open.pop();
    for (const auto& name : candidates.names()) {
      if (node.names.count(name)) continue;
      auto next = node.names;
      next.insert(name);
      next = dependency_closure(next, candidates);
      if (!seen.insert(next).second) continue;
      Node child{selection_score(candidates.subset(next, types), data, plans, cfg), order++, std::move(next)};
      if (child.score > best.score + kScoreTolerance) best = child;
      open.push(std::move(child));
    }
  }
  return candidates.subset(best.names, types);
}

}  // namespace nsp
