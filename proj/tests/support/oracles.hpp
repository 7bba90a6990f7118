#pragma once

// Random instance generators and brute-force reference implementations used
// by the unit tests and the acceptance binary. Nothing here calls the code
// under test except to build inputs (parsing, table construction).

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nsp/learner.hpp"

namespace oracle {

using namespace nsp;
using Rng = std::mt19937;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline TypeTable two_types() {
  TypeTable t;
  t.add({"a", {}});
  t.add({"b", {}});
  return t;
}

/// Objects o0:a, o1:a, o2:b, then random types up to n.
inline std::vector<Object> random_objects(Rng& rng, int n) {
  std::vector<Object> out;
  for (int i = 0; i < n; ++i) {
    const std::string type = i < 2 ? "a" : i == 2 ? "b" : (coin(rng, 0.5) ? "a" : "b");
    out.push_back({"o" + std::to_string(i), type, i});
  }
  return out;
}

struct Signature {
  std::string name;
  std::vector<std::string> types;
};

/// The fixed primitive vocabulary of the random instances.
inline std::vector<Signature> primitive_vocabulary() {
  return {{"P0", {"a"}}, {"P1", {"b"}}, {"P2", {"a", "b"}}, {"P3", {"a", "a"}}, {"P4", {"b"}}};
}

inline std::string primitive_source(const std::vector<Signature>& sigs) {
  std::string src;
  for (const auto& s : sigs) {
    src += "(primitive " + s.name;
    for (std::size_t i = 0; i < s.types.size(); ++i) src += " (?v" + std::to_string(i) + " " + s.types[i] + ")";
    src += " (< 0 1))\n";
  }
  return src;
}

/// Every tuple of objects matching `types` (repeats allowed).
inline std::vector<std::vector<int>> tuples(const std::vector<std::string>& types, const std::vector<Object>& objects) {
  std::vector<std::vector<int>> out{{}};
  for (const auto& t : types) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (const auto& o : objects) {
        if (o.type != t) continue;
        auto v = prefix;
        v.push_back(o.id);
        next.push_back(std::move(v));
      }
    }
    out = std::move(next);
  }
  return out;
}

inline AtomSet random_atoms(Rng& rng, const std::vector<Signature>& sigs, const std::vector<Object>& objects,
                            double density) {
  AtomSet s;
  for (const auto& sig : sigs) {
    for (auto& t : tuples(sig.types, objects)) {
      if (coin(rng, density)) s.insert({sig.name, t});
    }
  }
  return s;
}

inline const std::string& type_of(const std::vector<Object>& objects, int id) {
  for (const auto& o : objects) {
    if (o.id == id) return o.type;
  }
  throw Error("no object " + std::to_string(id));
}

// ---------------------------------------------------------------------------
// Learning instances

struct LearningInstance {
  TypeTable types;
  std::vector<Signature> sigs;
  AbstractDataset data;
};

inline SkillSpec go_skill() { return {"Go", {"a"}}; }
inline SkillSpec put_skill() { return {"Put", {"a", "b"}}; }

/// Up to `max_transitions` transitions of Go(a) / Put(a, b) over 3-4 objects.
/// Successful transitions toggle a few atoms over the skill arguments and at
/// most one other object; the rest are failures.
inline LearningInstance random_learning_instance(Rng& rng, int max_transitions, double density) {
  LearningInstance inst;
  inst.types = two_types();
  inst.sigs = primitive_vocabulary();
  auto objects = std::make_shared<const std::vector<Object>>(random_objects(rng, uniform(rng, 3, 4)));
  const int n = uniform(rng, 2, max_transitions);
  auto of_type = [&](const std::string& t, std::vector<int> exclude) {
    std::vector<int> out;
    for (const auto& o : *objects) {
      if (o.type == t && std::find(exclude.begin(), exclude.end(), o.id) == exclude.end()) out.push_back(o.id);
    }
    return out;
  };
  auto pick = [&](const std::vector<int>& v) { return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))]; };
  for (int k = 0; k < n; ++k) {
    const bool put = coin(rng, 0.5);
    GroundSkill skill{put ? put_skill() : go_skill(), {}};
    skill.args.push_back(pick(of_type("a", {})));
    if (put) skill.args.push_back(pick(of_type("b", {})));
    AtomSet s = random_atoms(rng, inst.sigs, *objects, density);
    if (coin(rng, 0.35)) {
      inst.data.negatives.push_back({s, skill, objects});
      continue;
    }
    std::vector<GroundAtom> toggles;
    const int x = skill.args[0];
    if (put) {
      const int y = skill.args[1];
      if (coin(rng, 0.7)) toggles.push_back({"P2", {x, y}});
      if (coin(rng, 0.4)) toggles.push_back({"P1", {y}});
      if (coin(rng, 0.3)) toggles.push_back({"P0", {x}});
      const auto others = of_type("b", {y});
      if (!others.empty() && coin(rng, 0.3)) toggles.push_back({"P4", {pick(others)}});
    } else {
      if (coin(rng, 0.7)) toggles.push_back({"P0", {x}});
      const auto others_a = of_type("a", {x});
      const auto others_b = of_type("b", {});
      const int extra = uniform(rng, 0, 2);
      if (extra == 1 && !others_a.empty()) toggles.push_back({"P3", {x, pick(others_a)}});
      if (extra == 2 && !others_b.empty()) toggles.push_back({"P2", {x, pick(others_b)}});
    }
    AtomSet post = s;
    for (const auto& t : toggles) {
      if (post.count(t)) {
        post.erase(t);
      } else {
        post.insert(t);
      }
    }
    inst.data.positives.push_back({s, skill, post, objects});
  }
  return inst;
}

inline PredicateTable table_of(const std::vector<Signature>& sigs, const std::set<std::string>& names,
                               const TypeTable& types) {
  std::vector<Signature> kept;
  for (const auto& s : sigs) {
    if (names.count(s.name)) kept.push_back(s);
  }
  return PredicateTable::build(parse_predicates(primitive_source(kept)), types);
}

// ---------------------------------------------------------------------------
// Brute-force precondition optimum

/// A lifted atom over parameter positions. Sorting these matches sorting the
/// engine's lifted atoms when parameter i is named ?x<i> and there are < 10.
struct PosAtom {
  std::string predicate;
  std::vector<int> params;
  auto operator<=>(const PosAtom&) const = default;
};

inline GroundAtom ground_pos(const PosAtom& a, const std::vector<int>& binding) {
  GroundAtom g{a.predicate, {}};
  for (int p : a.params) g.args.push_back(binding[static_cast<std::size_t>(p)]);
  return g;
}

/// Injective typed bindings of parameters, the first ones fixed to `args`.
inline std::vector<std::vector<int>> bindings(const std::vector<std::string>& param_types, const std::vector<int>& args,
                                              const std::vector<Object>& objects) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(args);
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (type_of(objects, args[i]) != param_types[i]) return out;
    for (std::size_t j = 0; j < i; ++j) {
      if (args[j] == args[i]) return out;
    }
  }
  std::function<void()> rec = [&]() {
    if (cur.size() == param_types.size()) {
      out.push_back(cur);
      return;
    }
    for (const auto& o : objects) {
      if (o.type != param_types[cur.size()] || std::find(cur.begin(), cur.end(), o.id) != cur.end()) continue;
      cur.push_back(o.id);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

/// Lifted atoms over `param_types` true in every member pre-state.
inline std::vector<PosAtom> candidate_atoms(const std::vector<Signature>& sigs, const std::vector<std::string>& param_types,
                                            const std::vector<const AtomSet*>& member_states,
                                            const std::vector<std::vector<int>>& member_bindings) {
  std::vector<Object> params;
  for (std::size_t i = 0; i < param_types.size(); ++i) params.push_back({"", param_types[i], static_cast<int>(i)});
  std::vector<PosAtom> out;
  for (const auto& sig : sigs) {
    for (const auto& t : tuples(sig.types, params)) {
      PosAtom a{sig.name, t};
      bool all = true;
      for (std::size_t m = 0; m < member_states.size() && all; ++m) {
        all = member_states[m]->count(ground_pos(a, member_bindings[m])) != 0;
      }
      if (all) out.push_back(a);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Transitions of one skill that are not members: the state and ground skill args.
struct Other {
  const AtomSet* state;
  std::vector<int> args;
  const std::vector<Object>* objects;
};

/// argmax over subsets of `cands` of J = correct/n - 0.01|Pre|, compared
/// exactly as the integer 100*correct - n*|Pre|; ties to the smaller set, then
/// to the lexicographically least sorted set.
inline std::vector<PosAtom> best_precondition(const std::vector<PosAtom>& cands, const std::vector<std::string>& param_types,
                                              std::size_t members, const std::vector<Other>& others) {
  const long n = static_cast<long>(members + others.size());
  std::vector<std::vector<std::vector<int>>> grounds;
  for (const auto& o : others) grounds.push_back(bindings(param_types, o.args, *o.objects));
  std::vector<PosAtom> best;
  long best_score = 0;
  bool have = false;
  for (std::uint32_t bits = 0; bits < (1u << cands.size()); ++bits) {
    std::vector<PosAtom> pre;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (bits & (1u << i)) pre.push_back(cands[i]);
    }
    long correct = static_cast<long>(members);
    for (std::size_t k = 0; k < others.size(); ++k) {
      bool holds_somewhere = false;
      for (const auto& b : grounds[k]) {
        bool all = true;
        for (const auto& a : pre) all = all && others[k].state->count(ground_pos(a, b)) != 0;
        holds_somewhere = holds_somewhere || all;
      }
      if (!holds_somewhere) ++correct;
    }
    const long score = 100 * correct - n * static_cast<long>(pre.size());
    const bool better = !have || score > best_score ||
                        (score == best_score && (pre.size() < best.size() || (pre.size() == best.size() && pre < best)));
    if (better) {
      best = pre;
      best_score = score;
      have = true;
    }
  }
  return best;
}

inline PosAtom to_pos(const LiftedAtom& a) {
  PosAtom p{a.predicate, {}};
  for (const auto& v : a.vars) p.params.push_back(std::stoi(v.substr(2)));
  return p;
}

// ---------------------------------------------------------------------------
// Brute-force predicate-set score

struct BruteHLA {
  std::string skill;
  std::vector<std::string> param_types;
  AtomSet rep_add, rep_del;
  std::vector<int> rep_params;  // representative objects, by parameter
  std::vector<PosAtom> add, del, pre;
};

inline AtomSet keep_only(const AtomSet& s, const std::set<std::string>& names) {
  AtomSet out;
  for (const auto& a : s) {
    if (names.count(a.predicate)) out.insert(a);
  }
  return out;
}

inline PosAtom lift_to(const GroundAtom& a, const std::vector<int>& params) {
  PosAtom p{a.predicate, {}};
  for (int o : a.args) {
    p.params.push_back(static_cast<int>(std::find(params.begin(), params.end(), o) - params.begin()));
  }
  return p;
}

/// Classification accuracy of HLAs learned by brute force on `inst` under
/// predicate set `names`, plus alpha_sel |names|.
inline double brute_force_score(const LearningInstance& inst, const std::set<std::string>& names, double alpha_sel) {
  struct Pos {
    AtomSet pre, add, del;
    const GroundSkill* skill;
    const std::vector<Object>* objects;
  };
  std::vector<Pos> pos;
  for (const auto& p : inst.data.positives) {
    Pos q{keep_only(p.pre, names), {}, {}, &p.skill, p.objects.get()};
    const AtomSet post = keep_only(p.post, names);
    for (const auto& a : post) {
      if (!q.pre.count(a)) q.add.insert(a);
    }
    for (const auto& a : q.pre) {
      if (!post.count(a)) q.del.insert(a);
    }
    pos.push_back(std::move(q));
  }
  std::vector<std::pair<AtomSet, const GroundSkill*>> neg;
  std::vector<const std::vector<Object>*> neg_objects;
  for (const auto& n : inst.data.negatives) {
    neg.emplace_back(keep_only(n.state, names), &n.skill);
    neg_objects.push_back(n.objects.get());
  }

  // Cluster: join the first HLA whose representative maps onto this delta.
  std::vector<BruteHLA> hlas;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::vector<std::vector<int>>> member_bindings;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto& p = pos[i];
    std::vector<int> params = p.skill->args;
    for (const auto* s : {&p.add, &p.del}) {
      for (const auto& a : *s) {
        for (int o : a.args) {
          if (std::find(params.begin(), params.end(), o) == params.end()) params.push_back(o);
        }
      }
    }
    bool placed = false;
    for (std::size_t h = 0; h < hlas.size() && !placed; ++h) {
      auto& hla = hlas[h];
      if (hla.skill != p.skill->spec.name || hla.rep_params.size() != params.size()) continue;
      std::vector<int> extras(params.begin() + static_cast<long>(p.skill->args.size()), params.end());
      std::sort(extras.begin(), extras.end());
      do {
        std::vector<int> binding = p.skill->args;
        binding.insert(binding.end(), extras.begin(), extras.end());
        bool types_ok = true;
        for (std::size_t k = 0; k < binding.size(); ++k) {
          types_ok = types_ok && type_of(*p.objects, binding[k]) == hla.param_types[k];
        }
        if (!types_ok) continue;
        AtomSet add, del;
        for (const auto& a : hla.add) add.insert(ground_pos(a, binding));
        for (const auto& a : hla.del) del.insert(ground_pos(a, binding));
        if (add == p.add && del == p.del) {
          members[h].push_back(i);
          member_bindings[h].push_back(binding);
          placed = true;
          break;
        }
      } while (std::next_permutation(extras.begin(), extras.end()));
    }
    if (placed) continue;
    BruteHLA h;
    h.skill = p.skill->spec.name;
    h.rep_params = params;
    for (int o : params) h.param_types.push_back(type_of(*p.objects, o));
    for (const auto& a : p.add) h.add.push_back(lift_to(a, params));
    for (const auto& a : p.del) h.del.push_back(lift_to(a, params));
    hlas.push_back(std::move(h));
    members.push_back({i});
    member_bindings.push_back({params});
  }

  std::vector<Signature> sigs;
  for (const auto& s : inst.sigs) {
    if (names.count(s.name)) sigs.push_back(s);
  }
  for (std::size_t h = 0; h < hlas.size(); ++h) {
    std::vector<const AtomSet*> states;
    for (auto m : members[h]) states.push_back(&pos[m].pre);
    const auto cands = candidate_atoms(sigs, hlas[h].param_types, states, member_bindings[h]);
    std::vector<Other> others;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (pos[i].skill->spec.name != hlas[h].skill) continue;
      if (std::find(members[h].begin(), members[h].end(), i) != members[h].end()) continue;
      others.push_back({&pos[i].pre, pos[i].skill->args, pos[i].objects});
    }
    for (std::size_t k = 0; k < neg.size(); ++k) {
      if (neg[k].second->spec.name == hlas[h].skill) others.push_back({&neg[k].first, neg[k].second->args, neg_objects[k]});
    }
    hlas[h].pre = best_precondition(cands, hlas[h].param_types, members[h].size(), others);
  }

  auto applicable = [&](const AtomSet& s, const GroundSkill& skill, const std::vector<Object>& objects) {
    std::vector<std::pair<const BruteHLA*, std::vector<int>>> out;
    for (const auto& h : hlas) {
      if (h.skill != skill.spec.name) continue;
      for (const auto& b : bindings(h.param_types, skill.args, objects)) {
        bool all = true;
        for (const auto& a : h.pre) all = all && s.count(ground_pos(a, b)) != 0;
        if (all) out.emplace_back(&h, b);
      }
    }
    return out;
  };
  std::size_t correct = 0;
  for (const auto& p : pos) {
    const auto apps = applicable(p.pre, *p.skill, *p.objects);
    bool ok = !apps.empty();
    for (const auto& [h, b] : apps) {
      AtomSet add, del;
      for (const auto& a : h->add) add.insert(ground_pos(a, b));
      for (const auto& a : h->del) del.insert(ground_pos(a, b));
      ok = ok && add == p.add && del == p.del;
    }
    if (ok) ++correct;
  }
  for (std::size_t k = 0; k < neg.size(); ++k) {
    if (applicable(neg[k].first, *neg[k].second, *neg_objects[k]).empty()) ++correct;
  }
  const std::size_t total = pos.size() + neg.size();
  const double acc = total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
  return acc + alpha_sel * static_cast<double>(names.size());
}

// ---------------------------------------------------------------------------
// Random derived-predicate tables

struct DerivedInstance {
  TypeTable types;
  PredicateTable table;
  std::vector<Signature> primitives;
  std::vector<Object> objects;
};

/// Primitive vocabulary plus 2-5 derived predicates drawn from templates
/// (negation, exists, forall, count=, transitive closure). Each derived
/// predicate reads only predicates declared before it, and itself.
inline DerivedInstance random_derived_instance(Rng& rng, int max_objects) {
  DerivedInstance inst;
  inst.types = two_types();
  inst.primitives = primitive_vocabulary();
  inst.objects = random_objects(rng, uniform(rng, 3, max_objects));
  std::vector<std::string> unary_a{"P0"}, unary_b{"P1", "P4"}, binary_ab{"P2"}, binary_aa{"P3"};
  auto any = [&](const std::vector<std::string>& v) { return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))]; };
  std::string src = primitive_source(inst.primitives);
  const int n = uniform(rng, 2, 5);
  for (int k = 0; k < n; ++k) {
    const std::string d = "D" + std::to_string(k);
    switch (uniform(rng, 0, 6)) {
      case 0:
        src += "(derived " + d + " (?x a) (not (holds " + any(unary_a) + " ?x)))\n";
        unary_a.push_back(d);
        break;
      case 1:
        src += "(derived " + d + " (?x a) (exists (?y b) (and (holds " + any(binary_ab) + " ?x ?y) (holds " +
               any(unary_b) + " ?y))))\n";
        unary_a.push_back(d);
        break;
      case 2:
        src += "(derived " + d + " (?x a) (forall (?y a) (or (eq ?x ?y) (not (holds " + any(binary_aa) +
               " ?y ?x)))))\n";
        unary_a.push_back(d);
        break;
      case 3:
        src += "(derived " + d + " (?x a) (count= (" + any(binary_ab) + " ?x *) (" + any(binary_aa) + " ?x *)))\n";
        unary_a.push_back(d);
        break;
      case 4: {
        const auto base = any(binary_aa);
        src += "(derived " + d + " (?x a) (?y a) (or (holds " + base + " ?x ?y) (exists (?z a) (and (holds " + base +
               " ?x ?z) (holds " + d + " ?z ?y)))))\n";
        binary_aa.push_back(d);
        break;
      }
      case 5:
        src += "(derived " + d + " (?y b) (and (holds " + any(unary_b) + " ?y) (not (holds " + any(unary_b) +
               " ?y))))\n";
        unary_b.push_back(d);
        break;
      default:
        src += "(derived " + d + " (?x a) (?y b) (or (holds " + any(binary_ab) + " ?x ?y) (and (holds " +
               any(unary_a) + " ?x) (holds " + any(unary_b) + " ?y))))\n";
        binary_ab.push_back(d);
        break;
    }
  }
  inst.table = PredicateTable::build(parse_predicates(src), inst.types);
  return inst;
}

/// Atoms of `s` whose predicate is in `names`.
inline AtomSet project(const AtomSet& s, const std::set<std::string>& names) { return keep_only(s, names); }

}  // namespace oracle
