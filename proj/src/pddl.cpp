#include "nsp/pddl.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace nsp {

namespace {

struct AuxAxiom {
  std::string name;
  std::vector<Param> params;
  std::string body;
};

struct ExportCtx {
  const PredicateTable* table = nullptr;
  const std::vector<Object>* objects = nullptr;
  std::string owner;
  int count_nodes = 0;
  std::vector<AuxAxiom> aux;
};

std::string atom_text(const std::string& pred, const std::vector<std::string>& vars) {
  std::string s = "(" + pred;
  for (const auto& v : vars) s += " " + v;
  return s + ")";
}

std::string typed_list(const std::vector<Param>& params) {
  std::string s;
  for (std::size_t i = 0; i < params.size(); ++i) s += (i ? " " : "") + params[i].var + " - " + params[i].type;
  return s;
}

std::string conj(const std::vector<std::string>& parts) {
  if (parts.size() == 1) return parts.front();
  std::string s = "(and";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::size_t count_of_type(const std::vector<Object>& objects, const std::string& type) {
  return static_cast<std::size_t>(
      std::count_if(objects.begin(), objects.end(), [&](const Object& o) { return o.type == type; }));
}

// Emits atleast_k axioms for one side of a count= and returns the call atoms, k = 1..n.
std::vector<std::string> atleast_calls(const CountSpec& spec, const std::string& tag, std::size_t n, ExportCtx& ctx) {
  const auto& decl = ctx.table->get(spec.predicate);
  std::vector<Param> params;
  std::string counted_type;
  for (std::size_t i = 0; i < spec.args.size(); ++i) {
    if (!spec.args[i]) {
      counted_type = decl.params[i].type;
      continue;
    }
    const bool seen = std::any_of(params.begin(), params.end(), [&](const Param& p) { return p.var == *spec.args[i]; });
    if (!seen) params.push_back({*spec.args[i], decl.params[i].type});
  }
  std::vector<std::string> vars;
  for (const auto& p : params) vars.push_back(p.var);
  std::vector<std::string> calls;
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<std::string> parts;
    for (std::size_t a = 1; a <= k; ++a) {
      for (std::size_t b = a + 1; b <= k; ++b) {
        parts.push_back("(not (= ?cnt" + std::to_string(a) + " ?cnt" + std::to_string(b) + "))");
      }
      std::vector<std::string> args;
      for (const auto& x : spec.args) args.push_back(x ? *x : "?cnt" + std::to_string(a));
      parts.push_back(atom_text(spec.predicate, args));
    }
    std::string body = conj(parts);
    for (std::size_t a = k; a >= 1; --a) {
      body = "(exists (?cnt" + std::to_string(a) + " - " + counted_type + ") " + body + ")";
    }
    const auto name = ctx.owner + "-" + tag + "-atleast" + std::to_string(k);
    ctx.aux.push_back({name, params, body});
    calls.push_back(atom_text(name, vars));
  }
  return calls;
}

std::string emit(const Expr& e, ExportCtx& ctx) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AndNode> || std::is_same_v<T, OrNode>) {
          std::string s = std::is_same_v<T, AndNode> ? "(and" : "(or";
          for (const auto& c : n.children) s += " " + emit(*c, ctx);
          return s + ")";
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return "(not " + emit(*n.child, ctx) + ")";
        } else if constexpr (std::is_same_v<T, HoldsNode>) {
          return atom_text(n.predicate, n.vars);
        } else if constexpr (std::is_same_v<T, QuantNode>) {
          return std::string(n.universal ? "(forall (" : "(exists (") + n.var + " - " + n.type + ") " +
                 emit(*n.body, ctx) + ")";
        } else if constexpr (std::is_same_v<T, SameNode>) {
          return "(= " + n.a + " " + n.b + ")";
        } else if constexpr (std::is_same_v<T, CountEqNode>) {
          if (!ctx.objects) throw Error("counting predicate " + ctx.owner + " needs a task's objects to export");
          const int id = ctx.count_nodes++;
          auto type_of = [&](const CountSpec& s) {
            const auto& d = ctx.table->get(s.predicate);
            for (std::size_t i = 0; i < s.args.size(); ++i) {
              if (!s.args[i]) return d.params[i].type;
            }
            return std::string();
          };
          const std::size_t n_objs = std::max(count_of_type(*ctx.objects, type_of(n.lhs)),
                                              count_of_type(*ctx.objects, type_of(n.rhs)));
          const auto l = atleast_calls(n.lhs, "l" + std::to_string(id), n_objs, ctx);
          const auto r = atleast_calls(n.rhs, "r" + std::to_string(id), n_objs, ctx);
          std::vector<std::string> parts;
          for (std::size_t k = 0; k < n_objs; ++k) {
            parts.push_back("(or (and " + l[k] + " " + r[k] + ") (and (not " + l[k] + ") (not " + r[k] + ")))");
          }
          return parts.empty() ? "(and)" : conj(parts);
        } else {
          throw Error("predicate " + ctx.owner + ": numeric and perceptual tests cannot appear in axioms");
        }
      },
      e.node);
}

std::string lifted_text(const LiftedAtom& a) { return atom_text(a.predicate, a.vars); }

std::map<int, std::string> object_names(const std::vector<Object>& objects) {
  std::map<int, std::string> out;
  for (const auto& o : objects) out[o.id] = o.name;
  return out;
}

std::string ground_text(const GroundAtom& a, const std::map<int, std::string>& names) {
  std::string s = "(" + a.predicate;
  for (int x : a.args) s += " " + names.at(x);
  return s + ")";
}

}  // namespace

std::string export_domain(const Model& model, const TypeTable& types, const std::string& name,
                          const std::vector<Object>* objects) {
  const auto& table = model.predicates;
  std::vector<std::pair<std::string, std::string>> axioms;
  ExportCtx ctx{&table, objects, "", 0, {}};
  for (const auto& stratum : table.strata()) {
    for (const auto& pred : stratum) {
      const auto& d = table.get(pred);
      ctx.owner = d.name;
      ctx.count_nodes = 0;
      const auto body = emit(*d.body, ctx);
      axioms.emplace_back("(" + d.name + (d.params.empty() ? "" : " " + typed_list(d.params)) + ")", body);
    }
  }

  std::ostringstream os;
  os << "(define (domain " << name << ")\n";
  os << "  (:requirements :strips :typing :equality :negative-preconditions :disjunctive-preconditions"
        " :quantified-preconditions :derived-predicates)\n";
  os << "  (:types";
  for (const auto& [t, _] : types.all()) os << " " << t;
  os << " - object)\n";
  os << "  (:predicates\n";
  for (const auto& d : table.decls()) {
    os << "    (" << d.name << (d.params.empty() ? "" : " " + typed_list(d.params)) << ")\n";
  }
  for (const auto& a : ctx.aux) {
    os << "    (" << a.name << (a.params.empty() ? "" : " " + typed_list(a.params)) << ")\n";
  }
  os << "  )\n";
  for (const auto& a : ctx.aux) {
    os << "  (:derived (" << a.name << (a.params.empty() ? "" : " " + typed_list(a.params)) << ")\n    " << a.body
       << ")\n";
  }
  for (const auto& [head, body] : axioms) os << "  (:derived " << head << "\n    " << body << ")\n";
  for (const auto& h : model.operators) {
    os << "  ; " << h.skill.name << "(";
    for (std::size_t i = 0; i < h.skill_args.size(); ++i) os << (i ? ", " : "") << h.skill_args[i];
    os << ")\n";
    os << "  (:action " << h.name << "\n";
    os << "    :parameters (" << typed_list(h.params) << ")\n";
    std::vector<std::string> pre;
    for (const auto& a : h.pre) pre.push_back(lifted_text(a));
    if (!h.allow_repeated_args) {
      for (std::size_t i = 0; i < h.params.size(); ++i) {
        for (std::size_t j = i + 1; j < h.params.size(); ++j) {
          if (h.params[i].type == h.params[j].type) {
            pre.push_back("(not (= " + h.params[i].var + " " + h.params[j].var + "))");
          }
        }
      }
    }
    std::vector<std::string> eff;
    for (const auto& a : h.add) eff.push_back(lifted_text(a));
    for (const auto& a : h.del) eff.push_back("(not " + lifted_text(a) + ")");
    os << "    :precondition (and";
    for (const auto& p : pre) os << " " << p;
    os << ")\n    :effect (and";
    for (const auto& e : eff) os << " " << e;
    os << "))\n";
  }
  os << ")\n";
  return os.str();
}

std::string export_problem(const Model& model, const Task& task, const AbstractState& init,
                           const std::string& domain_name) {
  const auto names = object_names(task.objects());
  std::ostringstream os;
  os << "(define (problem task-" << task.id << ")\n";
  os << "  (:domain " << domain_name << ")\n";
  os << "  (:objects";
  for (const auto& o : task.objects()) os << " " << o.name << " - " << o.type;
  os << ")\n  (:init";
  for (const auto& a : primitive_atoms(init.atoms, model.predicates)) os << "\n    " << ground_text(a, names);
  os << ")\n  (:goal (and";
  for (const auto& g : task.goal) os << " " << ground_text(g, names);
  os << "))\n)\n";
  return os.str();
}

PlanningExport export_planning_model(const Model& model, const TypeTable& types, const Task& task,
                                     const AbstractState& init, const std::string& name) {
  return {export_domain(model, types, name, &task.objects()), export_problem(model, task, init, name)};
}

namespace {

std::vector<Param> parse_typed(const std::vector<SExpr>& items, std::size_t from = 0) {
  std::vector<Param> out;
  std::vector<std::string> pending;
  for (std::size_t i = from; i < items.size(); ++i) {
    const auto& it = items[i];
    if (!it.is_symbol()) it.fail("expected a name in typed list");
    if (it.text == "-") {
      if (i + 1 >= items.size() || !items[i + 1].is_symbol()) it.fail("'-' must be followed by a type");
      for (auto& p : pending) out.push_back({p, items[i + 1].text});
      pending.clear();
      ++i;
    } else {
      pending.push_back(it.text);
    }
  }
  for (auto& p : pending) out.push_back({p, "object"});
  return out;
}

LiftedAtom parse_atom(const SExpr& e) {
  if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) e.fail("expected an atom");
  LiftedAtom a{e.items[0].text, {}};
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    if (!e.items[i].is_symbol()) e.items[i].fail("atom arguments must be names");
    a.vars.push_back(e.items[i].text);
  }
  return a;
}

std::vector<const SExpr*> conjuncts(const SExpr& e) {
  std::vector<const SExpr*> out;
  if (e.head() == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) out.push_back(&e.items[i]);
  } else {
    out.push_back(&e);
  }
  return out;
}

SExpr single_define(const std::string& text) {
  auto top = read_sexprs(text);
  if (top.size() != 1 || top[0].head() != "define") throw ParseError("expected one (define ...) form", 1, 1);
  return std::move(top[0]);
}

PddlAction parse_action(const SExpr& e) {
  PddlAction act;
  if (e.items.size() < 2 || !e.items[1].is_symbol()) e.fail("action needs a name");
  act.name = e.items[1].text;
  for (std::size_t i = 2; i + 1 < e.items.size(); i += 2) {
    const auto& key = e.items[i];
    const auto& val = e.items[i + 1];
    if (key.is_symbol(":parameters")) {
      act.params = parse_typed(val.items);
    } else if (key.is_symbol(":precondition")) {
      for (const auto* c : conjuncts(val)) {
        if (c->head() == "not" && c->items.size() == 2 && c->items[1].head() == "=") {
          const auto eq = parse_atom(c->items[1]);
          if (eq.vars.size() != 2) c->fail("(= a b) takes two arguments");
          act.distinct.insert({eq.vars[0], eq.vars[1]});
        } else {
          act.pre.insert(parse_atom(*c));
        }
      }
    } else if (key.is_symbol(":effect")) {
      for (const auto* c : conjuncts(val)) {
        if (c->head() == "not") {
          if (c->items.size() != 2) c->fail("malformed negative effect");
          act.del.insert(parse_atom(c->items[1]));
        } else {
          act.add.insert(parse_atom(*c));
        }
      }
    } else {
      key.fail("unknown action field");
    }
  }
  return act;
}

}  // namespace

PddlDomain parse_pddl_domain(const std::string& text) {
  const auto def = single_define(text);
  PddlDomain d;
  for (std::size_t i = 1; i < def.items.size(); ++i) {
    const auto& sec = def.items[i];
    const auto& h = sec.head();
    if (h == "domain") {
      if (sec.items.size() != 2) sec.fail("malformed domain name");
      d.name = sec.items[1].text;
    } else if (h == ":requirements") {
      continue;
    } else if (h == ":types") {
      for (const auto& p : parse_typed(sec.items, 1)) d.types.push_back(p.var);
    } else if (h == ":predicates") {
      for (std::size_t j = 1; j < sec.items.size(); ++j) {
        const auto& p = sec.items[j];
        if (!p.is_list() || p.items.empty()) p.fail("malformed predicate declaration");
        std::vector<std::string> ts;
        for (const auto& q : parse_typed(p.items, 1)) ts.push_back(q.type);
        d.predicates[p.items[0].text] = ts;
      }
    } else if (h == ":derived") {
      if (sec.items.size() != 3 || !sec.items[1].is_list() || sec.items[1].items.empty()) {
        sec.fail("malformed axiom");
      }
      d.axioms.push_back({sec.items[1].items[0].text, parse_typed(sec.items[1].items, 1), sec.items[2]});
    } else if (h == ":action") {
      d.actions.push_back(parse_action(sec));
    } else {
      sec.fail("unknown domain section '" + h + "'");
    }
  }
  return d;
}

PddlProblem parse_pddl_problem(const std::string& text) {
  const auto def = single_define(text);
  PddlProblem p;
  std::map<std::string, int> ids;
  auto ground = [&](const SExpr& e) {
    const auto a = parse_atom(e);
    GroundAtom g{a.predicate, {}};
    for (const auto& v : a.vars) {
      const auto it = ids.find(v);
      if (it == ids.end()) e.fail("unknown object '" + v + "'");
      g.args.push_back(it->second);
    }
    return g;
  };
  for (std::size_t i = 1; i < def.items.size(); ++i) {
    const auto& sec = def.items[i];
    const auto& h = sec.head();
    if (h == "problem") {
      p.name = sec.items.at(1).text;
    } else if (h == ":domain") {
      p.domain = sec.items.at(1).text;
    } else if (h == ":objects") {
      for (const auto& q : parse_typed(sec.items, 1)) {
        const int id = static_cast<int>(p.objects.size());
        ids[q.var] = id;
        p.objects.push_back({q.var, q.type, id});
      }
    } else if (h == ":init") {
      for (std::size_t j = 1; j < sec.items.size(); ++j) p.init.insert(ground(sec.items[j]));
    } else if (h == ":goal") {
      if (sec.items.size() != 2) sec.fail("malformed goal");
      for (const auto* c : conjuncts(sec.items[1])) p.goal.push_back(ground(*c));
    } else {
      sec.fail("unknown problem section '" + h + "'");
    }
  }
  return p;
}

namespace {

using Binding = std::map<std::string, int>;

class AxiomEvaluator {
public:
  AxiomEvaluator(const std::vector<Object>& objects, const AtomSet& atoms) : objects_(objects), atoms_(atoms) {}

  bool eval(const SExpr& e, Binding& b) const {
    const auto& h = e.head();
    if (h == "and") {
      for (std::size_t i = 1; i < e.items.size(); ++i) {
        if (!eval(e.items[i], b)) return false;
      }
      return true;
    }
    if (h == "or") {
      for (std::size_t i = 1; i < e.items.size(); ++i) {
        if (eval(e.items[i], b)) return true;
      }
      return false;
    }
    if (h == "not") return !eval(e.items.at(1), b);
    if (h == "exists" || h == "forall") return quant(parse_typed(e.items.at(1).items), 0, e.items.at(2), b, h == "exists");
    if (h == "=") return value(e.items.at(1), b) == value(e.items.at(2), b);
    GroundAtom g{h, {}};
    for (std::size_t i = 1; i < e.items.size(); ++i) g.args.push_back(value(e.items[i], b));
    return atoms_.count(g) != 0;
  }

  AtomSet& atoms() { return atoms_; }

private:
  int value(const SExpr& v, const Binding& b) const {
    const auto it = b.find(v.text);
    if (it == b.end()) v.fail("unbound variable '" + v.text + "'");
    return it->second;
  }

  bool quant(const std::vector<Param>& vars, std::size_t i, const SExpr& body, Binding& b, bool exists) const {
    if (i == vars.size()) return eval(body, b);
    const auto saved = b.find(vars[i].var) != b.end() ? std::optional<int>(b[vars[i].var]) : std::nullopt;
    bool result = !exists;
    for (const auto& o : objects_) {
      if (vars[i].type != "object" && o.type != vars[i].type) continue;
      b[vars[i].var] = o.id;
      const bool r = quant(vars, i + 1, body, b, exists);
      if (r == exists) {
        result = exists;
        break;
      }
    }
    if (saved) b[vars[i].var] = *saved;
    else b.erase(vars[i].var);
    return result;
  }

  const std::vector<Object>& objects_;
  AtomSet atoms_;
};

// Axiom-defined predicates referenced by `e`, with whether any occurrence is negated.
void dependencies(const SExpr& e, bool negated, const std::set<std::string>& defined,
                  std::map<std::string, bool>& out) {
  const auto& h = e.head();
  if (h == "and" || h == "or") {
    for (std::size_t i = 1; i < e.items.size(); ++i) dependencies(e.items[i], negated, defined, out);
  } else if (h == "not") {
    dependencies(e.items.at(1), !negated, defined, out);
  } else if (h == "exists" || h == "forall") {
    dependencies(e.items.at(2), negated, defined, out);
  } else if (defined.count(h)) {
    out[h] = out[h] || negated;
  }
}

}  // namespace

AtomSet evaluate_axioms(const PddlDomain& domain, const std::vector<Object>& objects, const AtomSet& atoms) {
  std::set<std::string> defined;
  for (const auto& a : domain.axioms) defined.insert(a.name);
  std::map<std::string, std::map<std::string, bool>> deps;
  for (const auto& a : domain.axioms) dependencies(a.body, false, defined, deps[a.name]);

  std::map<std::string, int> level;
  for (const auto& n : defined) level[n] = 0;
  const int cap = static_cast<int>(defined.size());
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [p, ds] : deps) {
      for (const auto& [q, neg] : ds) {
        const int need = level[q] + (neg ? 1 : 0);
        if (need > level[p]) {
          if (need > cap) throw Error("axioms are not stratified (negation through recursion at " + p + ")");
          level[p] = need;
          changed = true;
        }
      }
    }
  }

  AtomSet start;
  for (const auto& a : atoms) {
    if (!defined.count(a.predicate)) start.insert(a);
  }
  AxiomEvaluator ev(objects, start);
  for (int l = 0; l <= cap; ++l) {
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& ax : domain.axioms) {
        if (level[ax.name] != l) continue;
        std::vector<std::string> ts;
        for (const auto& p : ax.params) ts.push_back(p.type);
        for (const auto& tuple : argument_tuples(ts, objects)) {
          GroundAtom g{ax.name, tuple};
          if (ev.atoms().count(g)) continue;
          Binding b;
          for (std::size_t i = 0; i < tuple.size(); ++i) b[ax.params[i].var] = tuple[i];
          if (ev.eval(ax.body, b)) {
            ev.atoms().insert(std::move(g));
            changed = true;
          }
        }
      }
    }
  }
  return ev.atoms();
}

}  // namespace nsp
