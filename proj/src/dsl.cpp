#include "nsp/dsl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "nsp/sexpr.hpp"

namespace nsp {

namespace dsl {
ExprPtr make(decltype(Expr::node) node) { return std::make_shared<const Expr>(Expr{std::move(node)}); }
ExprPtr holds(std::string pred, std::vector<std::string> vars) {
  return make(HoldsNode{std::move(pred), std::move(vars)});
}
ExprPtr negate(ExprPtr e) { return make(NotNode{std::move(e)}); }
ExprPtr all_of(std::vector<ExprPtr> es) { return make(AndNode{std::move(es)}); }
ExprPtr any_of(std::vector<ExprPtr> es) { return make(OrNode{std::move(es)}); }
ExprPtr exists(std::string var, std::string type, ExprPtr body) {
  return make(QuantNode{false, std::move(var), std::move(type), std::move(body)});
}
ExprPtr forall(std::string var, std::string type, ExprPtr body) {
  return make(QuantNode{true, std::move(var), std::move(type), std::move(body)});
}
}  // namespace dsl

std::vector<std::string> PredicateDecl::param_types() const {
  std::vector<std::string> out;
  for (const auto& p : params) out.push_back(p.type);
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

const char* op_name(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

using Renamer = std::function<std::string(const std::string&)>;

void print_term(std::ostream& os, const NumTerm& t, const Renamer& rn) {
  if (const auto* d = std::get_if<double>(&t)) {
    os << format_number(*d);
  } else {
    const auto& f = std::get<FeatureRef>(t);
    os << "(feat " << rn(f.var) << " " << f.feature << ")";
  }
}

void print_count(std::ostream& os, const CountSpec& c, const Renamer& rn) {
  os << "(" << c.predicate;
  for (const auto& a : c.args) os << " " << (a ? rn(*a) : std::string("*"));
  os << ")";
}

struct Printer {
  std::ostream& os;
  // Scoped renaming: canonical mode maps variables to ?v<k> by binding order.
  bool canonical = false;
  std::vector<std::pair<std::string, std::string>> scope;
  int counter = 0;

  std::string bind(const std::string& var) {
    std::string name = canonical ? "?v" + std::to_string(counter++) : var;
    scope.emplace_back(var, name);
    return name;
  }
  std::string lookup(const std::string& var) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
      if (it->first == var) return it->second;
    }
    return var;
  }

  void print(const Expr& e) {
    Renamer rn = [this](const std::string& v) { return lookup(v); };
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, CompareNode>) {
            os << "(" << op_name(n.op) << " ";
            print_term(os, n.lhs, rn);
            os << " ";
            print_term(os, n.rhs, rn);
            os << ")";
          } else if constexpr (std::is_same_v<T, AssertNode>) {
            os << "(assert " << quote_string(n.text);
            for (const auto& v : n.vars) os << " " << lookup(v);
            os << ")";
          } else if constexpr (std::is_same_v<T, AndNode> || std::is_same_v<T, OrNode>) {
            os << (std::is_same_v<T, AndNode> ? "(and" : "(or");
            for (const auto& c : n.children) {
              os << " ";
              print(*c);
            }
            os << ")";
          } else if constexpr (std::is_same_v<T, NotNode>) {
            os << "(not ";
            print(*n.child);
            os << ")";
          } else if constexpr (std::is_same_v<T, HoldsNode>) {
            os << "(holds " << n.predicate;
            for (const auto& v : n.vars) os << " " << lookup(v);
            os << ")";
          } else if constexpr (std::is_same_v<T, QuantNode>) {
            os << (n.universal ? "(forall (" : "(exists (");
            os << bind(n.var) << " " << n.type << ") ";
            print(*n.body);
            scope.pop_back();
            os << ")";
          } else if constexpr (std::is_same_v<T, CountEqNode>) {
            os << "(count= ";
            print_count(os, n.lhs, rn);
            os << " ";
            print_count(os, n.rhs, rn);
            os << ")";
          } else if constexpr (std::is_same_v<T, SameNode>) {
            os << "(eq " << lookup(n.a) << " " << lookup(n.b) << ")";
          }
        },
        e.node);
  }
};

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  Printer p{os, false, {}, 0};
  p.print(e);
  return os.str();
}

std::string print_decl(const PredicateDecl& decl) {
  std::ostringstream os;
  os << (decl.is_derived() ? "(derived " : "(primitive ") << decl.name;
  for (const auto& p : decl.params) os << " (" << p.var << " " << p.type << ")";
  os << " " << print_expr(*decl.body) << ")";
  return os.str();
}

std::string canonical_body(const PredicateDecl& decl) {
  std::ostringstream os;
  Printer p{os, true, {}, 0};
  os << (decl.is_derived() ? "derived" : "primitive");
  for (const auto& prm : decl.params) os << " (" << p.bind(prm.var) << " " << prm.type << ")";
  os << " ";
  p.print(*decl.body);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_var(const SExpr& e) { return e.is_symbol() && e.text.size() > 1 && e.text[0] == '?'; }

struct DeclParser {
  PredicateKind kind;
  std::vector<std::string> scope;

  void require_bound(const SExpr& v) {
    if (!is_var(v)) v.fail("expected a variable, got '" + v.text + "'");
    if (std::find(scope.begin(), scope.end(), v.text) == scope.end()) {
      v.fail("unbound variable " + v.text);
    }
  }

  std::vector<std::string> vars(const SExpr& list, std::size_t from) {
    std::vector<std::string> out;
    for (std::size_t i = from; i < list.items.size(); ++i) {
      require_bound(list.items[i]);
      out.push_back(list.items[i].text);
    }
    return out;
  }

  NumTerm term(const SExpr& e) {
    if (e.is_symbol()) {
      char* end = nullptr;
      const double v = std::strtod(e.text.c_str(), &end);
      if (e.text.empty() || *end != '\0') e.fail("expected a number, got '" + e.text + "'");
      return v;
    }
    if (e.head() != "feat" || e.items.size() != 3 || !e.items[2].is_symbol()) {
      e.fail("expected a number or (feat ?v name)");
    }
    if (kind == PredicateKind::Derived) e.fail("feature access is not allowed in a derived predicate");
    require_bound(e.items[1]);
    return FeatureRef{e.items[1].text, e.items[2].text};
  }

  CountSpec count_spec(const SExpr& e) {
    if (!e.is_list() || e.items.empty() || !e.items[0].is_symbol()) e.fail("expected (Pred args...)");
    CountSpec c{e.items[0].text, {}};
    int counted = 0;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      if (e.items[i].is_symbol("*")) {
        c.args.emplace_back(std::nullopt);
        ++counted;
      } else {
        require_bound(e.items[i]);
        c.args.emplace_back(e.items[i].text);
      }
    }
    if (counted != 1) e.fail("count pattern needs exactly one '*' position");
    return c;
  }

  ExprPtr expr(const SExpr& e) {
    if (!e.is_list() || e.items.empty()) e.fail("expected an expression");
    const std::string& h = e.head();
    const auto n = e.items.size();
    if (h == "and" || h == "or") {
      std::vector<ExprPtr> cs;
      for (std::size_t i = 1; i < n; ++i) cs.push_back(expr(e.items[i]));
      return h == "and" ? dsl::all_of(std::move(cs)) : dsl::any_of(std::move(cs));
    }
    if (h == "not") {
      if (n != 2) e.fail("not takes one argument");
      return dsl::negate(expr(e.items[1]));
    }
    if (h == "holds") {
      if (kind == PredicateKind::Primitive) e.fail("holds is not allowed in a primitive predicate");
      if (n < 2 || !e.items[1].is_symbol()) e.fail("expected (holds Pred ?v...)");
      return dsl::holds(e.items[1].text, vars(e, 2));
    }
    if (h == "exists" || h == "forall") {
      if (n != 3) e.fail(h + " takes a binder and a body");
      const auto& b = e.items[1];
      if (!b.is_list() || b.items.size() != 2 || !is_var(b.items[0]) || !b.items[1].is_symbol()) {
        b.fail("expected (?v type)");
      }
      scope.push_back(b.items[0].text);
      auto body = expr(e.items[2]);
      scope.pop_back();
      return dsl::make(QuantNode{h == "forall", b.items[0].text, b.items[1].text, std::move(body)});
    }
    if (h == "<" || h == "<=" || h == "=" || h == ">=" || h == ">") {
      if (n != 3) e.fail("comparison takes two arguments");
      CmpOp op = h == "<" ? CmpOp::Lt : h == "<=" ? CmpOp::Le : h == "=" ? CmpOp::Eq : h == ">=" ? CmpOp::Ge : CmpOp::Gt;
      return dsl::make(CompareNode{op, term(e.items[1]), term(e.items[2])});
    }
    if (h == "assert") {
      if (kind == PredicateKind::Derived) e.fail("assert is not allowed in a derived predicate");
      if (n < 2 || e.items[1].kind != SExpr::Kind::String) e.fail("expected (assert \"text\" ?v...)");
      return dsl::make(AssertNode{e.items[1].text, vars(e, 2)});
    }
    if (h == "count=") {
      if (kind == PredicateKind::Primitive) e.fail("count= is not allowed in a primitive predicate");
      if (n != 3) e.fail("count= takes two patterns");
      return dsl::make(CountEqNode{count_spec(e.items[1]), count_spec(e.items[2])});
    }
    if (h == "eq") {
      if (n != 3) e.fail("eq takes two variables");
      require_bound(e.items[1]);
      require_bound(e.items[2]);
      return dsl::make(SameNode{e.items[1].text, e.items[2].text});
    }
    e.fail("unknown form '" + h + "'");
  }
};

}  // namespace

std::vector<PredicateDecl> parse_predicates(const std::string& source) {
  std::vector<PredicateDecl> out;
  std::set<std::string> names;
  for (const auto& top : read_sexprs(source)) {
    const auto& h = top.head();
    if (h != "primitive" && h != "derived") top.fail("expected (primitive ...) or (derived ...)");
    if (top.items.size() < 3 || !top.items[1].is_symbol()) top.fail("expected a predicate name");
    PredicateDecl d;
    d.name = top.items[1].text;
    d.kind = h == "derived" ? PredicateKind::Derived : PredicateKind::Primitive;
    DeclParser p{d.kind, {}};
    for (std::size_t i = 2; i + 1 < top.items.size(); ++i) {
      const auto& prm = top.items[i];
      if (!prm.is_list() || prm.items.size() != 2 || !is_var(prm.items[0]) || !prm.items[1].is_symbol()) {
        prm.fail("expected a parameter (?v type)");
      }
      if (std::find(p.scope.begin(), p.scope.end(), prm.items[0].text) != p.scope.end()) {
        prm.fail("duplicate parameter " + prm.items[0].text);
      }
      d.params.push_back({prm.items[0].text, prm.items[1].text});
      p.scope.push_back(prm.items[0].text);
    }
    d.body = p.expr(top.items.back());
    if (!names.insert(d.name).second) top.fail("duplicate declaration of " + d.name);
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Typechecking

namespace {

using Scope = std::vector<std::pair<std::string, std::string>>;  // var -> type

std::string scope_type(const Scope& s, const std::string& var) {
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    if (it->first == var) return it->second;
  }
  throw PredicateTypeError(TypeErrorKind::Malformed, "unbound variable " + var);
}

struct Checker {
  const TypeTable& types;
  const std::map<std::string, const PredicateDecl*>& decls;
  const PredicateDecl& self;
  std::set<std::pair<std::string, bool>> refs;  // (derived predicate, negative)

  void check_pred_args(const std::string& pred, const std::vector<std::optional<std::string>>& args,
                       const Scope& s) {
    auto it = decls.find(pred);
    if (it == decls.end()) {
      throw PredicateTypeError(TypeErrorKind::UnknownPredicate,
                               self.name + ": unknown predicate " + pred);
    }
    const auto& target = *it->second;
    if (target.params.size() != args.size()) {
      throw PredicateTypeError(TypeErrorKind::Malformed,
                               self.name + ": wrong arity for " + pred);
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] && scope_type(s, *args[i]) != target.params[i].type) {
        throw PredicateTypeError(TypeErrorKind::Malformed,
                                 self.name + ": argument " + std::to_string(i) + " of " + pred +
                                     " must be of type " + target.params[i].type);
      }
    }
  }

  void check_term(const NumTerm& t, const Scope& s) {
    if (const auto* f = std::get_if<FeatureRef>(&t)) {
      const auto& type = types.get(scope_type(s, f->var));
      if (!type.feature_index(f->feature)) {
        throw PredicateTypeError(TypeErrorKind::UnknownFeature,
                                 self.name + ": type " + type.name + " has no feature " + f->feature);
      }
    }
  }

  void check(const Expr& e, Scope& s, bool negative) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, CompareNode>) {
            check_term(n.lhs, s);
            check_term(n.rhs, s);
          } else if constexpr (std::is_same_v<T, AssertNode>) {
            for (std::size_t i = 0; i < n.vars.size(); ++i) {
              scope_type(s, n.vars[i]);
              if (n.text.find("{" + std::to_string(i) + "}") == std::string::npos) {
                throw PredicateTypeError(TypeErrorKind::Malformed,
                                         self.name + ": assertion text lacks placeholder {" +
                                             std::to_string(i) + "}");
              }
            }
            if (n.text.find("{" + std::to_string(n.vars.size()) + "}") != std::string::npos) {
              throw PredicateTypeError(TypeErrorKind::Malformed,
                                       self.name + ": assertion has more placeholders than arguments");
            }
          } else if constexpr (std::is_same_v<T, AndNode> || std::is_same_v<T, OrNode>) {
            for (const auto& c : n.children) check(*c, s, negative);
          } else if constexpr (std::is_same_v<T, NotNode>) {
            check(*n.child, s, !negative);
          } else if constexpr (std::is_same_v<T, HoldsNode>) {
            std::vector<std::optional<std::string>> args(n.vars.begin(), n.vars.end());
            check_pred_args(n.predicate, args, s);
            refs.emplace(n.predicate, negative);
          } else if constexpr (std::is_same_v<T, QuantNode>) {
            if (!types.contains(n.type)) {
              throw PredicateTypeError(TypeErrorKind::UnknownType, self.name + ": unknown type " + n.type);
            }
            s.emplace_back(n.var, n.type);
            check(*n.body, s, negative);
            s.pop_back();
          } else if constexpr (std::is_same_v<T, CountEqNode>) {
            // Counting is not monotone; treat both sides as negative reads.
            for (const auto* c : {&n.lhs, &n.rhs}) {
              check_pred_args(c->predicate, c->args, s);
              refs.emplace(c->predicate, true);
            }
          } else if constexpr (std::is_same_v<T, SameNode>) {
            scope_type(s, n.a);
            scope_type(s, n.b);
          }
        },
        e.node);
  }
};

}  // namespace

namespace {

void collect_refs(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AndNode> || std::is_same_v<T, OrNode>) {
          for (const auto& c : n.children) collect_refs(*c, out);
        } else if constexpr (std::is_same_v<T, NotNode>) {
          collect_refs(*n.child, out);
        } else if constexpr (std::is_same_v<T, QuantNode>) {
          collect_refs(*n.body, out);
        } else if constexpr (std::is_same_v<T, HoldsNode>) {
          out.insert(n.predicate);
        } else if constexpr (std::is_same_v<T, CountEqNode>) {
          out.insert(n.lhs.predicate);
          out.insert(n.rhs.predicate);
        }
      },
      e.node);
}

}  // namespace

std::set<std::string> referenced_predicates(const PredicateDecl& decl) {
  std::set<std::string> out;
  if (decl.body) collect_refs(*decl.body, out);
  return out;
}

PredicateTable PredicateTable::build(std::vector<PredicateDecl> decls, const TypeTable& types) {
  std::sort(decls.begin(), decls.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  PredicateTable t;
  std::map<std::string, const PredicateDecl*> by_name;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    if (i > 0 && decls[i - 1].name == decls[i].name) {
      throw PredicateTypeError(TypeErrorKind::Malformed, "duplicate predicate " + decls[i].name);
    }
    for (const auto& p : decls[i].params) {
      if (!types.contains(p.type)) {
        throw PredicateTypeError(TypeErrorKind::UnknownType,
                                 decls[i].name + ": unknown type " + p.type);
      }
    }
    by_name[decls[i].name] = &decls[i];
  }

  // Edges between derived predicates; `negative` marks reads through not/count=.
  std::map<std::string, std::set<std::pair<std::string, bool>>> edges;
  for (const auto& d : decls) {
    Checker c{types, by_name, d, {}};
    Scope s;
    for (const auto& p : d.params) s.emplace_back(p.var, p.type);
    c.check(*d.body, s, false);
    if (d.is_derived()) {
      for (const auto& [pred, neg] : c.refs) {
        if (by_name.at(pred)->is_derived()) {
          edges[d.name].emplace(pred, neg);
          t.deps_[d.name].insert(pred);
        }
      }
      t.deps_[d.name];
    }
  }

  // Tarjan SCC over derived predicates; components come out in dependency
  // order (callees first), which is exactly the stratum order.
  std::map<std::string, int> index, low;
  std::vector<std::string> stack;
  std::set<std::string> on_stack;
  int counter = 0;
  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& [w, neg] : edges[v]) {
      if (!index.count(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      std::set<std::string> members(comp.begin(), comp.end());
      for (const auto& m : comp) {
        for (const auto& [x, neg] : edges[m]) {
          if (neg && members.count(x)) {
            std::string cycle;
            for (const auto& c : comp) cycle += (cycle.empty() ? "" : ", ") + c;
            throw PredicateTypeError(TypeErrorKind::UnstratifiedNegation,
                                     "negation through recursion among {" + cycle + "}");
          }
        }
      }
      t.strata_.push_back(std::move(comp));
    }
  };
  for (const auto& d : decls) {
    if (d.is_derived() && !index.count(d.name)) visit(d.name);
  }

  t.decls_ = std::move(decls);
  for (std::size_t i = 0; i < t.decls_.size(); ++i) t.index_[t.decls_[i].name] = i;
  return t;
}

const PredicateDecl* PredicateTable::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &decls_[it->second];
}

const PredicateDecl& PredicateTable::get(const std::string& name) const {
  const auto* d = find(name);
  if (!d) throw PredicateTypeError(TypeErrorKind::UnknownPredicate, "unknown predicate " + name);
  return *d;
}

bool PredicateTable::is_derived(const std::string& name) const {
  const auto* d = find(name);
  return d && d->is_derived();
}

std::vector<std::string> PredicateTable::names() const {
  std::vector<std::string> out;
  for (const auto& d : decls_) out.push_back(d.name);
  return out;
}

PredicateTable PredicateTable::with(const std::vector<PredicateDecl>& extra, const TypeTable& types) const {
  auto all = decls_;
  for (const auto& d : extra) {
    if (const auto* existing = find(d.name)) {
      if (print_decl(*existing) != print_decl(d)) {
        throw PredicateTypeError(TypeErrorKind::Malformed, "conflicting declarations of " + d.name);
      }
      continue;
    }
    all.push_back(d);
  }
  return build(std::move(all), types);
}

PredicateTable PredicateTable::subset(const std::set<std::string>& names, const TypeTable& types) const {
  std::vector<PredicateDecl> keep;
  for (const auto& d : decls_) {
    if (names.count(d.name)) keep.push_back(d);
  }
  return build(std::move(keep), types);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int bound(const std::vector<std::pair<std::string, int>>& b, const std::string& var) {
  for (auto it = b.rbegin(); it != b.rend(); ++it) {
    if (it->first == var) return it->second;
  }
  throw Error("unbound variable " + var);
}

double term_value(const NumTerm& t, const std::vector<std::pair<std::string, int>>& b, const EvalEnv& env) {
  if (const auto* d = std::get_if<double>(&t)) return *d;
  const auto& f = std::get<FeatureRef>(t);
  return env.state->get(*env.types, bound(b, f.var), f.feature);
}

std::size_t count_matches(const CountSpec& c, const std::vector<std::pair<std::string, int>>& b,
                          const EvalEnv& env) {
  const auto& target = env.table->get(c.predicate);
  std::vector<int> args(c.args.size(), -1);
  std::size_t hole = 0;
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    if (c.args[i]) {
      args[i] = bound(b, *c.args[i]);
    } else {
      hole = i;
    }
  }
  std::size_t count = 0;
  for (const auto& o : *env.objects) {
    if (o.type != target.params[hole].type) continue;
    args[hole] = o.id;
    if ((*env.holds)(c.predicate, args)) ++count;
  }
  return count;
}

}  // namespace

bool eval_expr(const Expr& e, std::vector<std::pair<std::string, int>>& b, const EvalEnv& env) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CompareNode>) {
          const double l = term_value(n.lhs, b, env);
          const double r = term_value(n.rhs, b, env);
          switch (n.op) {
            case CmpOp::Lt: return l < r;
            case CmpOp::Le: return l <= r;
            case CmpOp::Eq: return std::abs(l - r) <= env.opts.eq_epsilon;
            case CmpOp::Ge: return l >= r;
            case CmpOp::Gt: return l > r;
          }
          return false;
        } else if constexpr (std::is_same_v<T, AssertNode>) {
          AssertionQuery q;
          q.text = n.text;
          for (const auto& v : n.vars) q.args.push_back(bound(b, v));
          q.focus = q.args;
          if (env.atom) q.atom = *env.atom;
          static const PerceptionContext no_ctx;
          return env.perceiver->evaluate_assertion(q, *env.state, env.ctx ? *env.ctx : no_ctx);
        } else if constexpr (std::is_same_v<T, AndNode>) {
          for (const auto& c : n.children) {
            if (!eval_expr(*c, b, env)) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, OrNode>) {
          for (const auto& c : n.children) {
            if (eval_expr(*c, b, env)) return true;
          }
          return false;
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return !eval_expr(*n.child, b, env);
        } else if constexpr (std::is_same_v<T, HoldsNode>) {
          std::vector<int> args;
          args.reserve(n.vars.size());
          for (const auto& v : n.vars) args.push_back(bound(b, v));
          return (*env.holds)(n.predicate, args);
        } else if constexpr (std::is_same_v<T, QuantNode>) {
          for (const auto& o : *env.objects) {
            if (o.type != n.type) continue;
            b.emplace_back(n.var, o.id);
            const bool v = eval_expr(*n.body, b, env);
            b.pop_back();
            if (n.universal && !v) return false;
            if (!n.universal && v) return true;
          }
          return n.universal;
        } else if constexpr (std::is_same_v<T, CountEqNode>) {
          return count_matches(n.lhs, b, env) == count_matches(n.rhs, b, env);
        } else if constexpr (std::is_same_v<T, SameNode>) {
          return bound(b, n.a) == bound(b, n.b);
        }
      },
      e.node);
}

namespace {

bool args_match(const PredicateDecl& decl, const std::vector<int>& args, const std::vector<Object>& objects,
                const FeatureState* state) {
  if (args.size() != decl.params.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const Object* o = nullptr;
    if (state) {
      auto it = std::lower_bound(objects.begin(), objects.end(), args[i],
                                 [](const Object& x, int v) { return x.id < v; });
      if (it != objects.end() && it->id == args[i]) o = &*it;
    } else {
      for (const auto& x : objects) {
        if (x.id == args[i]) {
          o = &x;
          break;
        }
      }
    }
    if (!o || o->type != decl.params[i].type) return false;
  }
  return true;
}

}  // namespace

bool eval_primitive(const PredicateDecl& decl, const std::vector<int>& args, const FeatureState& state,
                    const TypeTable& types, const Perceiver& perceiver, const PerceptionContext& ctx,
                    const EvalOptions& opts) {
  if (decl.is_derived()) return false;
  if (!args_match(decl, args, state.objects, &state)) return false;
  std::vector<std::pair<std::string, int>> b;
  for (std::size_t i = 0; i < args.size(); ++i) b.emplace_back(decl.params[i].var, args[i]);
  GroundAtom atom{decl.name, args};
  EvalEnv env;
  env.objects = &state.objects;
  env.types = &types;
  env.state = &state;
  env.perceiver = &perceiver;
  env.ctx = &ctx;
  env.atom = &atom;
  env.opts = opts;
  return eval_expr(*decl.body, b, env);
}

bool eval_derived(const PredicateDecl& decl, const std::vector<int>& args, const std::vector<Object>& objects,
                  const PredicateTable& table, const AtomLookup& holds) {
  if (!decl.is_derived()) return false;
  if (!args_match(decl, args, objects, nullptr)) return false;
  std::vector<std::pair<std::string, int>> b;
  for (std::size_t i = 0; i < args.size(); ++i) b.emplace_back(decl.params[i].var, args[i]);
  EvalEnv env;
  env.objects = &objects;
  env.table = &table;
  env.holds = &holds;
  return eval_expr(*decl.body, b, env);
}

}  // namespace nsp
