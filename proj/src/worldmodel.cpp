#include "nsp/worldmodel.hpp"

#include "nsp/sexpr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>

namespace nsp {

std::string HLA::param_type(const std::string& var) const {
  for (const auto& p : params) {
    if (p.var == var) return p.type;
  }
  throw Error(name + ": unknown parameter " + var);
}

void validate_hla(const HLA& hla, const PredicateTable& table) {
  std::set<std::string> vars;
  for (const auto& p : hla.params) {
    if (!vars.insert(p.var).second) throw Error(hla.name + ": duplicate parameter " + p.var);
  }
  if (hla.skill.param_types.size() != hla.skill_args.size()) {
    throw Error(hla.name + ": skill " + hla.skill.name + " arity mismatch");
  }
  for (std::size_t i = 0; i < hla.skill_args.size(); ++i) {
    if (hla.param_type(hla.skill_args[i]) != hla.skill.param_types[i]) {
      throw Error(hla.name + ": skill argument " + std::to_string(i) + " has the wrong type");
    }
  }
  auto check = [&](const LiftedAtomSet& atoms, bool effect) {
    for (const auto& a : atoms) {
      const auto& decl = table.get(a.predicate);
      if (decl.params.size() != a.vars.size()) throw Error(hla.name + ": wrong arity for " + a.predicate);
      for (std::size_t i = 0; i < a.vars.size(); ++i) {
        if (hla.param_type(a.vars[i]) != decl.params[i].type) {
          throw Error(hla.name + ": argument type mismatch in " + a.predicate);
        }
      }
      if (effect && decl.is_derived()) {
        throw Error(hla.name + ": derived predicate " + a.predicate + " in effects");
      }
    }
  };
  check(hla.pre, false);
  check(hla.add, true);
  check(hla.del, true);
  for (const auto& a : hla.add) {
    if (hla.del.count(a)) throw Error(hla.name + ": add and delete effects overlap");
  }
}

GroundAtom ground_atom(const LiftedAtom& a, const HLA& hla, const std::vector<int>& binding) {
  GroundAtom g{a.predicate, {}};
  for (const auto& v : a.vars) {
    std::size_t i = 0;
    while (i < hla.params.size() && hla.params[i].var != v) ++i;
    if (i == hla.params.size()) throw Error(hla.name + ": unknown variable " + v);
    g.args.push_back(binding[i]);
  }
  return g;
}

GroundHLA ground(const HLA& hla, const std::vector<int>& binding) {
  GroundHLA g;
  g.hla = &hla;
  g.binding = binding;
  g.skill.spec = hla.skill;
  for (const auto& v : hla.skill_args) g.skill.args.push_back(ground_atom(LiftedAtom{"", {v}}, hla, binding).args[0]);
  for (const auto& a : hla.pre) g.pre.insert(ground_atom(a, hla, binding));
  for (const auto& a : hla.add) g.add.insert(ground_atom(a, hla, binding));
  for (const auto& a : hla.del) g.del.insert(ground_atom(a, hla, binding));
  return g;
}

std::string GroundHLA::str(const FeatureState& names) const {
  std::ostringstream os;
  os << hla->name << "(";
  for (std::size_t i = 0; i < binding.size(); ++i) {
    if (i) os << ", ";
    os << names.object(binding[i]).name;
  }
  os << ")";
  return os.str();
}

std::vector<GroundHLA> ground_all(const std::vector<HLA>& hlas, const std::vector<Object>& objects) {
  std::vector<GroundHLA> out;
  for (const auto& hla : hlas) {
    std::vector<std::string> types;
    for (const auto& p : hla.params) types.push_back(p.type);
    for (auto& binding : argument_tuples(types, objects)) {
      if (!hla.allow_repeated_args) {
        auto sorted = binding;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
      }
      out.push_back(ground(hla, binding));
    }
  }
  return out;
}

std::optional<AbstractState> apply(const AbstractState& s, const GroundHLA& g, const PredicateTable& table,
                                   const std::vector<Object>& objects) {
  for (const auto& a : g.pre) {
    if (!s.contains(a)) return std::nullopt;
  }
  AtomSet next = primitive_atoms(s.atoms, table);
  for (const auto& a : g.del) next.erase(a);
  for (const auto& a : g.add) next.insert(a);
  return AbstractState{close_derived(next, table, objects), true};
}

bool equivalent_up_to_renaming(const HLA& a, const HLA& b) {
  if (a.params.size() != b.params.size() || a.skill.name != b.skill.name ||
      a.pre.size() != b.pre.size() || a.add.size() != b.add.size() || a.del.size() != b.del.size() ||
      a.allow_repeated_args != b.allow_repeated_args) {
    return false;
  }
  const std::size_t n = a.params.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  do {
    bool types_ok = true;
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < n && types_ok; ++i) {
      types_ok = a.params[i].type == b.params[perm[i]].type;
      rename[a.params[i].var] = b.params[perm[i]].var;
    }
    if (!types_ok) continue;
    auto map_set = [&](const LiftedAtomSet& s) {
      LiftedAtomSet out;
      for (const auto& atom : s) {
        LiftedAtom m{atom.predicate, {}};
        for (const auto& v : atom.vars) m.vars.push_back(rename.at(v));
        out.insert(std::move(m));
      }
      return out;
    };
    std::vector<std::string> args;
    for (const auto& v : a.skill_args) args.push_back(rename.at(v));
    if (args == b.skill_args && map_set(a.pre) == b.pre && map_set(a.add) == b.add && map_set(a.del) == b.del) {
      return true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// ---------------------------------------------------------------------------
// Listing format

namespace {

std::string typed_var(const HLA& hla, const std::string& v) { return v + ":" + hla.param_type(v); }

std::string print_atoms(const HLA& hla, const LiftedAtomSet& atoms) {
  std::ostringstream os;
  os << "[";
  bool first = true;
  for (const auto& a : atoms) {
    if (!first) os << ", ";
    first = false;
    os << a.predicate << "(";
    for (std::size_t i = 0; i < a.vars.size(); ++i) {
      if (i) os << ", ";
      os << typed_var(hla, a.vars[i]);
    }
    os << ")";
  }
  os << "]";
  return os.str();
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct TypedTerm {
  std::string var;
  std::string type;
};

TypedTerm parse_typed(const std::string& raw) {
  const auto t = trim(raw);
  const auto colon = t.find(':');
  if (t.empty() || t[0] != '?' || colon == std::string::npos) throw Error("malformed typed variable '" + t + "'");
  return {t.substr(0, colon), t.substr(colon + 1)};
}

std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty()) parts.push_back(trim(cur));
  return parts;
}

std::string unbracket(const std::string& raw) {
  const auto t = trim(raw);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw Error("expected a bracketed list: " + t);
  return t.substr(1, t.size() - 2);
}

std::pair<std::string, std::vector<TypedTerm>> parse_call(const std::string& raw) {
  const auto t = trim(raw);
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')') throw Error("malformed atom '" + t + "'");
  std::vector<TypedTerm> args;
  for (const auto& a : split_top(t.substr(open + 1, t.size() - open - 2))) args.push_back(parse_typed(a));
  return {trim(t.substr(0, open)), std::move(args)};
}

LiftedAtomSet parse_atoms(const std::string& raw) {
  LiftedAtomSet out;
  for (const auto& part : split_top(unbracket(raw))) {
    auto [pred, args] = parse_call(part);
    LiftedAtom a{pred, {}};
    for (const auto& t : args) a.vars.push_back(t.var);
    out.insert(std::move(a));
  }
  return out;
}

}  // namespace

std::string print_hla(const HLA& hla) {
  std::ostringstream os;
  os << "NSRT-" << hla.name << ":\n";
  os << "    Parameters: [";
  for (std::size_t i = 0; i < hla.params.size(); ++i) {
    if (i) os << ", ";
    os << hla.params[i].var << ":" << hla.params[i].type;
  }
  os << "]\n";
  os << "    Preconditions: " << print_atoms(hla, hla.pre) << "\n";
  os << "    Add Effects: " << print_atoms(hla, hla.add) << "\n";
  os << "    Delete Effects: " << print_atoms(hla, hla.del) << "\n";
  os << "    Ignore Effects: " << print_atoms(hla, hla.ignore) << "\n";
  os << "    Option Spec: " << hla.skill.name << "(";
  for (std::size_t i = 0; i < hla.skill_args.size(); ++i) {
    if (i) os << ", ";
    os << typed_var(hla, hla.skill_args[i]);
  }
  os << ")\n";
  if (hla.allow_repeated_args) os << "    Repeated Args: true\n";
  return os.str();
}

std::vector<HLA> parse_hlas(const std::string& text) {
  std::vector<HLA> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  HLA* cur = nullptr;
  std::set<std::string> names;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == ';') continue;
    try {
      if (t.rfind("NSRT-", 0) == 0) {
        if (t.back() != ':') throw Error("expected ':' after operator name");
        out.emplace_back();
        cur = &out.back();
        cur->name = t.substr(5, t.size() - 6);
        if (!names.insert(cur->name).second) throw Error("duplicate operator " + cur->name);
        continue;
      }
      if (!cur) throw Error("field outside an operator block");
      const auto colon = t.find(':');
      if (colon == std::string::npos) throw Error("expected 'Field: value'");
      const auto key = trim(t.substr(0, colon));
      const auto value = trim(t.substr(colon + 1));
      if (key == "Parameters") {
        for (const auto& p : split_top(unbracket(value))) {
          auto tt = parse_typed(p);
          cur->params.push_back({tt.var, tt.type});
        }
      } else if (key == "Preconditions") {
        cur->pre = parse_atoms(value);
      } else if (key == "Add Effects") {
        cur->add = parse_atoms(value);
      } else if (key == "Delete Effects") {
        cur->del = parse_atoms(value);
      } else if (key == "Ignore Effects") {
        cur->ignore = parse_atoms(value);
      } else if (key == "Option Spec") {
        auto [skill, args] = parse_call(value);
        cur->skill.name = skill;
        for (const auto& a : args) {
          cur->skill.param_types.push_back(a.type);
          cur->skill_args.push_back(a.var);
        }
      } else if (key == "Repeated Args") {
        cur->allow_repeated_args = value == "true";
      } else {
        throw Error("unknown field '" + key + "'");
      }
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno, 1);
    }
  }
  return out;
}

std::string print_model(const Model& model) {
  std::ostringstream os;
  for (const auto& d : model.predicates.decls()) os << print_decl(d) << "\n";
  os << "\n";
  for (const auto& h : model.operators) os << print_hla(h);
  return os.str();
}

Model parse_model(const std::string& text, const TypeTable& types) {
  std::istringstream in(text);
  std::string line, preds, ops;
  bool in_ops = false;
  while (std::getline(in, line)) {
    if (!in_ops && trim(line).rfind("NSRT-", 0) == 0) in_ops = true;
    (in_ops ? ops : preds) += line + "\n";
  }
  Model m;
  m.predicates = PredicateTable::build(parse_predicates(preds), types);
  m.operators = parse_hlas(ops);
  for (const auto& h : m.operators) validate_hla(h, m.predicates);
  return m;
}

}  // namespace nsp
