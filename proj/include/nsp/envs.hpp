#pragma once

#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nsp/core.hpp"
#include "nsp/perceiver.hpp"
#include "nsp/worldmodel.hpp"

namespace nsp {

class UnknownDomain : public Error {
public:
  explicit UnknownDomain(const std::string& name) : Error("unknown domain: " + name) {}
};

/// Seeded task sampler for one domain. Task ids are the index within the batch.
class TaskGenerator {
public:
  virtual ~TaskGenerator() = default;
  virtual std::vector<Task> train(std::size_t n, std::uint64_t seed) const = 0;
  virtual std::vector<Task> test(std::size_t n, std::uint64_t seed) const = 0;
};

struct DomainSpec {
  std::string name;
  TypeTable types;
  std::vector<SkillSpec> skills;
  std::set<std::string> goal_predicates;
  /// Psi_0 with Omega_0.
  Model initial;
  /// Hand-written ground-truth predicates and operators.
  Model oracle;
  AssertionRegistry registry;
  /// Source text of the scripted proposal pool.
  std::string pool;
  std::size_t n_train = 5;
  std::size_t n_test = 50;
  int n_abstract = 8;
};

struct Domain {
  DomainSpec spec;
  std::unique_ptr<Environment> env;
  std::unique_ptr<TaskGenerator> tasks;
};

std::vector<std::string> domain_names();

/// Throws UnknownDomain.
Domain make_domain(const std::string& name);

/// Text of a shipped data file, e.g. ("cover", "oracle.model").
std::string domain_asset(const std::string& domain, const std::string& file);

/// Environment-independent helpers shared by the simulators.
namespace sim {

/// Builds a FeatureState from objects; features start at each type's lower bound.
FeatureState make_state(const TypeTable& types, const std::vector<Object>& objects);

/// Index of the argument object, or -1 if the skill has no such argument.
inline int arg(const GroundSkill& s, std::size_t i) { return i < s.args.size() ? s.args[i] : -1; }

/// Uniform integer in [lo, hi].
int uniform_int(std::mt19937_64& rng, int lo, int hi);
double uniform_real(std::mt19937_64& rng, double lo, double hi);

}  // namespace sim

/// Per-domain constructors (one translation unit each).
Domain make_cover_domain(bool heavy);
Domain make_blocks_domain();
Domain make_coffee_domain();
Domain make_balance_domain();

}  // namespace nsp
