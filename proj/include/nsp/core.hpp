#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nsp {

/// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FeatureDef {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

struct ObjectType {
  std::string name;
  std::vector<FeatureDef> features;

  std::optional<std::size_t> feature_index(const std::string& feature) const;
};

/// Registry of object types for one environment. Names are unique.
class TypeTable {
public:
  void add(ObjectType type);
  const ObjectType& get(const std::string& name) const;
  bool contains(const std::string& name) const { return types_.count(name) != 0; }
  const std::map<std::string, ObjectType>& all() const { return types_; }

private:
  std::map<std::string, ObjectType> types_;
};

struct Object {
  std::string name;
  std::string type;
  int id = 0;

  auto operator<=>(const Object&) const = default;
};

/// A ground relational fact of the simulator's scene graph.
struct Fact {
  std::string relation;
  std::vector<int> args;

  auto operator<=>(const Fact&) const = default;
};

/// Low-level state: per-object features plus the ground-truth scene graph.
/// Objects are kept sorted by id; feature vectors follow the type schema.
struct FeatureState {
  std::vector<Object> objects;
  std::map<int, std::vector<double>> features;
  std::set<Fact> scene;
  std::set<Fact> occluded;
  int step_index = 0;

  const Object& object(int id) const;
  const Object* find_object(const std::string& name) const;
  double get(int id, std::size_t feature) const { return features.at(id).at(feature); }
  double get(const TypeTable& types, int id, const std::string& feature) const;
  void set(const TypeTable& types, int id, const std::string& feature, double value);
  std::vector<int> objects_of_type(const std::string& type) const;

  bool holds(const std::string& relation, std::vector<int> args) const {
    return scene.count(Fact{relation, std::move(args)}) != 0;
  }
  void assert_fact(const std::string& relation, std::vector<int> args) {
    scene.insert(Fact{relation, std::move(args)});
  }
  void retract_fact(const std::string& relation, const std::vector<int>& args) {
    scene.erase(Fact{relation, args});
  }

  /// Checks the schema and scene-graph invariants; throws Error on violation.
  void validate(const TypeTable& types) const;

  bool operator==(const FeatureState&) const = default;
};

struct SkillSpec {
  std::string name;
  std::vector<std::string> param_types;

  bool operator==(const SkillSpec&) const = default;
};

struct GroundSkill {
  SkillSpec spec;
  std::vector<int> args;

  std::string str(const FeatureState& state) const;
  bool operator==(const GroundSkill&) const = default;
  auto operator<=>(const GroundSkill& o) const {
    if (auto c = spec.name <=> o.spec.name; c != 0) return c;
    return args <=> o.args;
  }
};

enum class SkillTypeErrorKind { ArityMismatch, TypeMismatch };

class SkillTypeError : public Error {
public:
  SkillTypeError(SkillTypeErrorKind kind, std::size_t position, const std::string& what)
      : Error(what), kind_(kind), position_(position) {}
  SkillTypeErrorKind kind() const { return kind_; }
  std::size_t position() const { return position_; }

private:
  SkillTypeErrorKind kind_;
  std::size_t position_;
};

/// Binds a skill to objects. Throws SkillTypeError on arity or type mismatch.
GroundSkill ground_skill(const SkillSpec& spec, const std::vector<Object>& args);

/// A predicate applied to concrete objects (ids). Ordered by (predicate, ids).
struct GroundAtom {
  std::string predicate;
  std::vector<int> args;

  auto operator<=>(const GroundAtom&) const = default;
};

using AtomSet = std::set<GroundAtom>;

std::string atom_str(const GroundAtom& atom, const FeatureState& state);

struct Task {
  int id = 0;
  FeatureState init;
  std::vector<GroundAtom> goal;
  /// Ground-truth marker used only for scoring: the goal cannot be reached.
  bool impossible = false;

  const std::vector<Object>& objects() const { return init.objects; }
};

struct ExecutionResult {
  std::optional<FeatureState> next;

  bool success() const { return next.has_value(); }
  static ExecutionResult failure() { return {}; }
  static ExecutionResult ok(FeatureState s) { return {std::move(s)}; }
};

class NoActiveTask : public Error {
public:
  NoActiveTask() : Error("environment has no active task") {}
};

/// Simulator interface. Execution is deterministic in (state, skill); a
/// failed skill leaves the observable state unchanged.
class Environment {
public:
  virtual ~Environment() = default;

  virtual const std::string& name() const = 0;
  virtual const TypeTable& types() const = 0;
  virtual const std::vector<SkillSpec>& skills() const = 0;

  void reset(const Task& task);
  const FeatureState& state() const;
  bool has_task() const { return state_.has_value(); }

  /// Runs the skill on the current state and advances it on success.
  ExecutionResult execute(const GroundSkill& skill);

  /// Pure transition function used by execute().
  virtual ExecutionResult step(const FeatureState& state, const GroundSkill& skill) const = 0;

  const SkillSpec& skill(const std::string& name) const;

private:
  std::optional<FeatureState> state_;
};

/// Runs a skill against an environment, treating ill-typed groundings as failures.
ExecutionResult env_execute(Environment& env, const SkillSpec& spec, const std::vector<Object>& args);

}  // namespace nsp
