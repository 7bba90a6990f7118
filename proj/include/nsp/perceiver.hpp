#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsp/core.hpp"

namespace nsp {

/// A natural-language assertion about objects, e.g. "{0} is holding {1}".
/// `focus` is the object subset the query may look at (the crop); when empty
/// it defaults to the arguments. `atom` names the ground atom being evaluated
/// so that context from the previous step can be consulted.
struct AssertionQuery {
  std::string text;
  std::vector<int> args;
  std::vector<int> focus;
  std::optional<GroundAtom> atom;
};

/// What the perceiver knows about the step that produced the current state.
/// prev_skill is set only when that skill executed successfully.
struct PerceptionContext {
  std::optional<GroundSkill> prev_skill;
  std::optional<FeatureState> prev_state;
  std::map<GroundAtom, bool> prev_atoms;

  bool empty() const { return !prev_skill && !prev_state && prev_atoms.empty(); }
};

enum class OracleAnswer { True, False, Unknown };

/// Declared outcome of a skill on one scene relation: after `skill` succeeds,
/// relation(args[positions...]) has truth value `value`.
struct NominalEffect {
  std::string skill;
  std::string relation;
  std::vector<std::size_t> positions;
  bool value = true;
};

/// Maps assertion templates onto scene-graph relations.
class AssertionRegistry {
public:
  void add(const std::string& text, const std::string& relation);
  void add_nominal_effect(NominalEffect effect) { effects_.push_back(std::move(effect)); }

  const std::string* relation_for(const std::string& text) const;
  const std::map<std::string, std::string>& templates() const { return templates_; }
  const std::vector<NominalEffect>& nominal_effects() const { return effects_; }

  static std::string normalize(const std::string& text);

private:
  std::map<std::string, std::string> templates_;
  std::vector<NominalEffect> effects_;
};

struct PerceiverConfig {
  double noise = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic stand-in for a vision-language model. Answers are read from
/// the scene graph; occluded facts are resolved from the perception context.
class Perceiver {
public:
  Perceiver() = default;
  Perceiver(AssertionRegistry registry, PerceiverConfig config)
      : registry_(std::move(registry)), config_(config) {}
  virtual ~Perceiver() = default;
  Perceiver(const Perceiver&) = default;
  Perceiver& operator=(const Perceiver&) = default;

  /// Direct scene-graph answer with no context and no noise.
  OracleAnswer lookup(const AssertionQuery& q, const FeatureState& state) const;

  virtual bool evaluate_assertion(const AssertionQuery& q, const FeatureState& state,
                          const PerceptionContext& ctx) const;

  const AssertionRegistry& registry() const { return registry_; }
  const PerceiverConfig& config() const { return config_; }

private:
  std::optional<bool> from_context(const std::string& relation, const AssertionQuery& q,
                                   const PerceptionContext& ctx) const;

  AssertionRegistry registry_;
  PerceiverConfig config_;
};

/// Display labels "<type><id>" (e.g. "jug3"), unique per object.
std::map<int, std::string> label_objects(const FeatureState& state);

std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v);
std::uint64_t hash_string(const std::string& s);

}  // namespace nsp
