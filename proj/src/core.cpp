#include "nsp/core.hpp"

#include <algorithm>
#include <sstream>

namespace nsp {

std::optional<std::size_t> ObjectType::feature_index(const std::string& feature) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == feature) return i;
  }
  return std::nullopt;
}

void TypeTable::add(ObjectType type) {
  std::set<std::string> seen;
  for (const auto& f : type.features) {
    if (!seen.insert(f.name).second) {
      throw Error("duplicate feature '" + f.name + "' in type '" + type.name + "'");
    }
  }
  auto name = type.name;
  if (!types_.emplace(name, std::move(type)).second) {
    throw Error("duplicate object type '" + name + "'");
  }
}

const ObjectType& TypeTable::get(const std::string& name) const {
  auto it = types_.find(name);
  if (it == types_.end()) throw Error("unknown object type '" + name + "'");
  return it->second;
}

const Object& FeatureState::object(int id) const {
  auto it = std::lower_bound(objects.begin(), objects.end(), id,
                             [](const Object& o, int v) { return o.id < v; });
  if (it == objects.end() || it->id != id) throw Error("no object with id " + std::to_string(id));
  return *it;
}

const Object* FeatureState::find_object(const std::string& name) const {
  for (const auto& o : objects) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

double FeatureState::get(const TypeTable& types, int id, const std::string& feature) const {
  const auto& type = types.get(object(id).type);
  auto idx = type.feature_index(feature);
  if (!idx) throw Error("type '" + type.name + "' has no feature '" + feature + "'");
  return features.at(id).at(*idx);
}

void FeatureState::set(const TypeTable& types, int id, const std::string& feature, double value) {
  const auto& type = types.get(object(id).type);
  auto idx = type.feature_index(feature);
  if (!idx) throw Error("type '" + type.name + "' has no feature '" + feature + "'");
  features.at(id).at(*idx) = value;
}

std::vector<int> FeatureState::objects_of_type(const std::string& type) const {
  std::vector<int> out;
  for (const auto& o : objects) {
    if (o.type == type) out.push_back(o.id);
  }
  return out;
}

void FeatureState::validate(const TypeTable& types) const {
  std::set<int> ids;
  std::set<std::string> names;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.id < 0) throw Error("object '" + o.name + "' has negative id");
    if (i > 0 && objects[i - 1].id >= o.id) throw Error("objects not sorted by unique id");
    if (!names.insert(o.name).second) throw Error("duplicate object name '" + o.name + "'");
    ids.insert(o.id);
    auto it = features.find(o.id);
    if (it == features.end() || it->second.size() != types.get(o.type).features.size()) {
      throw Error("object '" + o.name + "' does not match its feature schema");
    }
  }
  if (features.size() != objects.size()) throw Error("features reference unknown objects");
  for (const auto* facts : {&scene, &occluded}) {
    for (const auto& f : *facts) {
      for (int a : f.args) {
        if (!ids.count(a)) throw Error("scene fact '" + f.relation + "' references unknown object");
      }
    }
  }
}

std::string GroundSkill::str(const FeatureState& state) const {
  std::ostringstream os;
  os << spec.name << "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    os << state.object(args[i]).name;
  }
  os << ")";
  return os.str();
}

std::string atom_str(const GroundAtom& atom, const FeatureState& state) {
  std::ostringstream os;
  os << atom.predicate << "(";
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (i) os << ", ";
    os << state.object(atom.args[i]).name;
  }
  os << ")";
  return os.str();
}

GroundSkill ground_skill(const SkillSpec& spec, const std::vector<Object>& args) {
  if (args.size() != spec.param_types.size()) {
    throw SkillTypeError(SkillTypeErrorKind::ArityMismatch, args.size(),
                         spec.name + ": expected " + std::to_string(spec.param_types.size()) +
                             " arguments, got " + std::to_string(args.size()));
  }
  GroundSkill g{spec, {}};
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i].type != spec.param_types[i]) {
      throw SkillTypeError(SkillTypeErrorKind::TypeMismatch, i,
                           spec.name + ": argument " + std::to_string(i) + " must be of type " +
                               spec.param_types[i]);
    }
    g.args.push_back(args[i].id);
  }
  return g;
}

void Environment::reset(const Task& task) { state_ = task.init; }

const FeatureState& Environment::state() const {
  if (!state_) throw NoActiveTask();
  return *state_;
}

ExecutionResult Environment::execute(const GroundSkill& skill) {
  if (!state_) throw NoActiveTask();
  auto result = step(*state_, skill);
  if (result.next) {
    result.next->step_index = state_->step_index + 1;
    state_ = *result.next;
  }
  return result;
}

const SkillSpec& Environment::skill(const std::string& name) const {
  for (const auto& s : skills()) {
    if (s.name == name) return s;
  }
  throw Error("unknown skill '" + name + "'");
}

ExecutionResult env_execute(Environment& env, const SkillSpec& spec, const std::vector<Object>& args) {
  if (!env.has_task()) throw NoActiveTask();
  try {
    return env.execute(ground_skill(spec, args));
  } catch (const SkillTypeError&) {
    return ExecutionResult::failure();
  }
}

}  // namespace nsp
