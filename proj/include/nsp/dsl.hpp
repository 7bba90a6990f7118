#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "nsp/core.hpp"
#include "nsp/perceiver.hpp"

namespace nsp {

// Predicate language. Surface syntax (s-expressions):
//
//   (primitive Name (?v type)... BODY)
//   (derived   Name (?v type)... BODY)
//
//   BODY := (and BODY...) | (or BODY...) | (not BODY)
//         | (holds Pred ?v...)                    derived only
//         | (exists (?v type) BODY) | (forall (?v type) BODY)
//         | (< NUM NUM) | (<= ...) | (= ...) | (>= ...) | (> ...)
//         | (assert "text with {0} {1}" ?v...)   primitive only
//         | (count= (Pred ?v * ...) (Pred ?v * ...))  derived only
//         | (eq ?a ?b)                            same object
//   NUM  := number | (feat ?v feature)            primitive only

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class CmpOp { Lt, Le, Eq, Ge, Gt };

struct FeatureRef {
  std::string var;
  std::string feature;
  bool operator==(const FeatureRef&) const = default;
};

using NumTerm = std::variant<double, FeatureRef>;

struct CompareNode {
  CmpOp op;
  NumTerm lhs;
  NumTerm rhs;
};
struct AssertNode {
  std::string text;
  std::vector<std::string> vars;
};
struct AndNode {
  std::vector<ExprPtr> children;
};
struct OrNode {
  std::vector<ExprPtr> children;
};
struct NotNode {
  ExprPtr child;
};
struct HoldsNode {
  std::string predicate;
  std::vector<std::string> vars;
};
struct QuantNode {
  bool universal = false;
  std::string var;
  std::string type;
  ExprPtr body;
};
/// Predicate pattern with exactly one counted position (nullopt).
struct CountSpec {
  std::string predicate;
  std::vector<std::optional<std::string>> args;
};
struct CountEqNode {
  CountSpec lhs;
  CountSpec rhs;
};
struct SameNode {
  std::string a;
  std::string b;
};

struct Expr {
  std::variant<CompareNode, AssertNode, AndNode, OrNode, NotNode, HoldsNode, QuantNode,
               CountEqNode, SameNode>
      node;
};

enum class PredicateKind { Primitive, Derived };

struct Param {
  std::string var;
  std::string type;
  bool operator==(const Param&) const = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<Param> params;
  PredicateKind kind = PredicateKind::Primitive;
  ExprPtr body;

  std::vector<std::string> param_types() const;
  bool is_derived() const { return kind == PredicateKind::Derived; }
};

/// Canonical single-line rendering; parse(print(d)) reproduces d.
std::string print_decl(const PredicateDecl& decl);
std::string print_expr(const Expr& e);

/// Rendering with the name dropped and variables renamed by binding order;
/// two decls are alpha-equivalent iff their canonical bodies are equal.
std::string canonical_body(const PredicateDecl& decl);

/// Names of the predicates read by a derived predicate's body (via holds/count=).
std::set<std::string> referenced_predicates(const PredicateDecl& decl);

/// Parses predicate source. Throws ParseError (with line/column) on syntax
/// or well-formedness errors and on duplicate declarations.
std::vector<PredicateDecl> parse_predicates(const std::string& source);

enum class TypeErrorKind { UnknownType, UnknownFeature, UnknownPredicate, UnstratifiedNegation, Malformed };

class PredicateTypeError : public Error {
public:
  PredicateTypeError(TypeErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  TypeErrorKind kind() const { return kind_; }

private:
  TypeErrorKind kind_;
};

/// Typechecked, stratified set of predicate declarations. Immutable.
class PredicateTable {
public:
  PredicateTable() = default;

  /// Typechecks `decls` against `types`. Throws PredicateTypeError.
  static PredicateTable build(std::vector<PredicateDecl> decls, const TypeTable& types);

  const PredicateDecl* find(const std::string& name) const;
  const PredicateDecl& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  bool is_derived(const std::string& name) const;

  /// Declarations in name order.
  const std::vector<PredicateDecl>& decls() const { return decls_; }
  std::vector<std::string> names() const;
  /// Derived predicates grouped into strata, lowest first.
  const std::vector<std::vector<std::string>>& strata() const { return strata_; }
  /// Derived predicates read directly by each derived predicate's body.
  const std::map<std::string, std::set<std::string>>& dependencies() const { return deps_; }
  std::size_t size() const { return decls_.size(); }
  bool empty() const { return decls_.empty(); }

  /// Union with another table (names must not collide unless equal).
  PredicateTable with(const std::vector<PredicateDecl>& extra, const TypeTable& types) const;
  PredicateTable subset(const std::set<std::string>& names, const TypeTable& types) const;

private:
  std::vector<PredicateDecl> decls_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> strata_;
  std::map<std::string, std::set<std::string>> deps_;
};

/// Settings for numeric comparison.
struct EvalOptions {
  double eq_epsilon = 1e-9;
};

/// Evaluates a primitive predicate on concrete objects. Total: wrong arity or
/// argument types yield false.
bool eval_primitive(const PredicateDecl& decl, const std::vector<int>& args,
                    const FeatureState& state, const TypeTable& types,
                    const Perceiver& perceiver, const PerceptionContext& ctx,
                    const EvalOptions& opts = {});

using AtomLookup = std::function<bool(const std::string&, const std::vector<int>&)>;

/// Evaluates a derived predicate against a set of true atoms.
bool eval_derived(const PredicateDecl& decl, const std::vector<int>& args,
                  const std::vector<Object>& objects, const PredicateTable& table,
                  const AtomLookup& holds);

/// Evaluates an arbitrary body with an explicit variable binding. Either
/// state-side hooks (state/perceiver) or `holds` may be absent when the body
/// does not need them.
struct EvalEnv {
  const std::vector<Object>* objects = nullptr;
  const TypeTable* types = nullptr;
  const FeatureState* state = nullptr;
  const Perceiver* perceiver = nullptr;
  const PerceptionContext* ctx = nullptr;
  const PredicateTable* table = nullptr;
  const AtomLookup* holds = nullptr;
  const GroundAtom* atom = nullptr;
  EvalOptions opts;
};

bool eval_expr(const Expr& e, std::vector<std::pair<std::string, int>>& binding, const EvalEnv& env);

// Builders, used by tests and generators.
namespace dsl {
ExprPtr make(decltype(Expr::node) node);
ExprPtr holds(std::string pred, std::vector<std::string> vars);
ExprPtr negate(ExprPtr e);
ExprPtr all_of(std::vector<ExprPtr> es);
ExprPtr any_of(std::vector<ExprPtr> es);
ExprPtr exists(std::string var, std::string type, ExprPtr body);
ExprPtr forall(std::string var, std::string type, ExprPtr body);
}  // namespace dsl

}  // namespace nsp
