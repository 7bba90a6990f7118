#include "nsp/abstraction.hpp"

#include <map>
#include <set>

namespace nsp {

std::vector<std::vector<int>> argument_tuples(const std::vector<std::string>& param_types,
                                              const std::vector<Object>& objects) {
  std::vector<std::vector<int>> domains;
  for (const auto& t : param_types) {
    std::vector<int> d;
    for (const auto& o : objects) {
      if (o.type == t) d.push_back(o.id);
    }
    if (d.empty()) return {};
    domains.push_back(std::move(d));
  }
  std::vector<std::vector<int>> out;
  std::vector<int> cur(domains.size());
  std::vector<std::size_t> idx(domains.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < domains.size(); ++i) cur[i] = domains[i][idx[i]];
    out.push_back(cur);
    std::size_t k = domains.size();
    while (k > 0) {
      --k;
      if (++idx[k] < domains[k].size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (domains.empty()) return out;
  }
}

AtomSet primitive_atoms(const AtomSet& atoms, const PredicateTable& table) {
  AtomSet out;
  for (const auto& a : atoms) {
    const auto* d = table.find(a.predicate);
    if (d && !d->is_derived()) out.insert(a);
  }
  return out;
}

namespace {

using Facts = std::map<std::string, std::set<std::vector<int>>>;

Facts index_facts(const AtomSet& atoms) {
  Facts f;
  for (const auto& a : atoms) f[a.predicate].insert(a.args);
  return f;
}

AtomSet flatten(const Facts& facts) {
  AtomSet out;
  for (const auto& [pred, tuples] : facts) {
    for (const auto& t : tuples) out.insert(GroundAtom{pred, t});
  }
  return out;
}

AtomSet closure(const AtomSet& atoms, const PredicateTable& table, const std::vector<Object>& objects,
                bool semi_naive) {
  Facts facts = index_facts(primitive_atoms(atoms, table));
  const AtomLookup holds = [&facts](const std::string& p, const std::vector<int>& args) {
    auto it = facts.find(p);
    return it != facts.end() && it->second.count(args) != 0;
  };

  for (const auto& stratum : table.strata()) {
    std::map<std::string, std::vector<std::vector<int>>> candidates;
    for (const auto& name : stratum) {
      candidates[name] = argument_tuples(table.get(name).param_types(), objects);
    }
    std::set<std::string> dirty(stratum.begin(), stratum.end());
    while (!dirty.empty()) {
      std::set<std::string> changed;
      for (const auto& name : stratum) {
        if (!dirty.count(name)) continue;
        const auto& decl = table.get(name);
        std::vector<std::vector<int>> fresh;
        for (const auto& args : candidates[name]) {
          if (facts[name].count(args)) continue;
          if (eval_derived(decl, args, objects, table, holds)) fresh.push_back(args);
        }
        for (auto& t : fresh) facts[name].insert(std::move(t));
        if (!fresh.empty()) changed.insert(name);
      }
      dirty.clear();
      if (changed.empty()) break;
      for (const auto& name : stratum) {
        if (!semi_naive) {
          dirty.insert(name);
          continue;
        }
        const auto& deps = table.dependencies().at(name);
        for (const auto& c : changed) {
          if (deps.count(c)) {
            dirty.insert(name);
            break;
          }
        }
      }
    }
  }
  return flatten(facts);
}

}  // namespace

AtomSet close_derived(const AtomSet& atoms, const PredicateTable& table, const std::vector<Object>& objects) {
  return closure(atoms, table, objects, true);
}

AtomSet close_derived_naive(const AtomSet& atoms, const PredicateTable& table,
                            const std::vector<Object>& objects) {
  return closure(atoms, table, objects, false);
}

AbstractState abstract_state(const FeatureState& x, const PredicateTable& table, const TypeTable& types,
                             const Perceiver& perceiver, const PerceptionContext& ctx, const EvalOptions& opts) {
  AtomSet prim;
  for (const auto& decl : table.decls()) {
    if (decl.is_derived()) continue;
    for (const auto& args : argument_tuples(decl.param_types(), x.objects)) {
      if (eval_primitive(decl, args, x, types, perceiver, ctx, opts)) prim.insert(GroundAtom{decl.name, args});
    }
  }
  return AbstractState{close_derived(prim, table, x.objects), true};
}

std::map<GroundAtom, bool> atom_truth_map(const AbstractState& s, const PredicateTable& table,
                                          const std::vector<Object>& objects) {
  std::map<GroundAtom, bool> out;
  for (const auto& decl : table.decls()) {
    for (const auto& args : argument_tuples(decl.param_types(), objects)) {
      GroundAtom a{decl.name, args};
      const bool v = s.contains(a);
      out.emplace(std::move(a), v);
    }
  }
  return out;
}

}  // namespace nsp

namespace nsp {

PerceptionContext next_context(const FeatureState& prev, const GroundSkill& skill,
                               const AbstractState& prev_abstract, const PredicateTable& table) {
  PerceptionContext ctx;
  ctx.prev_skill = skill;
  ctx.prev_state = prev;
  ctx.prev_atoms = atom_truth_map(prev_abstract, table, prev.objects);
  return ctx;
}

}  // namespace nsp
