#include "nsp/perceiver.hpp"

#include <algorithm>
#include <cctype>

namespace nsp {

std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over the combined word
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string AssertionRegistry::normalize(const std::string& text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == ' ')) out.pop_back();
  return out;
}

void AssertionRegistry::add(const std::string& text, const std::string& relation) {
  templates_[normalize(text)] = relation;
}

const std::string* AssertionRegistry::relation_for(const std::string& text) const {
  auto it = templates_.find(normalize(text));
  return it == templates_.end() ? nullptr : &it->second;
}

OracleAnswer Perceiver::lookup(const AssertionQuery& q, const FeatureState& state) const {
  const auto* relation = registry_.relation_for(q.text);
  if (!relation) return OracleAnswer::False;
  if (!q.focus.empty()) {
    for (int a : q.args) {
      if (std::find(q.focus.begin(), q.focus.end(), a) == q.focus.end()) return OracleAnswer::False;
    }
  }
  Fact fact{*relation, q.args};
  if (state.occluded.count(fact)) return OracleAnswer::Unknown;
  return state.scene.count(fact) ? OracleAnswer::True : OracleAnswer::False;
}

std::optional<bool> Perceiver::from_context(const std::string& relation, const AssertionQuery& q,
                                            const PerceptionContext& ctx) const {
  if (ctx.prev_skill) {
    for (const auto& eff : registry_.nominal_effects()) {
      if (eff.skill != ctx.prev_skill->spec.name || eff.relation != relation) continue;
      if (eff.positions.size() != q.args.size()) continue;
      bool match = true;
      for (std::size_t i = 0; i < eff.positions.size() && match; ++i) {
        const auto pos = eff.positions[i];
        match = pos < ctx.prev_skill->args.size() && ctx.prev_skill->args[pos] == q.args[i];
      }
      if (match) return eff.value;
    }
  }
  if (q.atom) {
    auto it = ctx.prev_atoms.find(*q.atom);
    if (it != ctx.prev_atoms.end()) return it->second;
  }
  return std::nullopt;
}

bool Perceiver::evaluate_assertion(const AssertionQuery& q, const FeatureState& state,
                                   const PerceptionContext& ctx) const {
  bool answer = false;
  switch (lookup(q, state)) {
    case OracleAnswer::True: answer = true; break;
    case OracleAnswer::False: answer = false; break;
    case OracleAnswer::Unknown: {
      const auto* relation = registry_.relation_for(q.text);
      answer = relation ? from_context(*relation, q, ctx).value_or(false) : false;
      break;
    }
  }
  if (config_.noise > 0.0) {
    std::uint64_t h = mix_hash(config_.seed, static_cast<std::uint64_t>(state.step_index));
    h = mix_hash(h, hash_string(AssertionRegistry::normalize(q.text)));
    for (int a : q.args) h = mix_hash(h, static_cast<std::uint64_t>(a));
    const double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
    if (u < config_.noise) answer = !answer;
  }
  return answer;
}

std::map<int, std::string> label_objects(const FeatureState& state) {
  std::map<int, std::string> labels;
  for (const auto& o : state.objects) {
    labels[o.id] = o.type + std::to_string(o.id);
  }
  return labels;
}

}  // namespace nsp
