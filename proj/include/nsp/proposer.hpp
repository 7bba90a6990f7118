#pragma once

#include <chrono>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "nsp/dataset.hpp"
#include "nsp/dsl.hpp"
#include "nsp/planner.hpp"

namespace nsp {

enum class Strategy { S1, S2, S3 };

std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& s);

/// One labeled transition shown to a proposer. Atoms are rendered with
/// object display labels, e.g. "Holding(robot0, block2)".
struct Exemplar {
  std::string skill;
  bool success = true;
  std::vector<std::string> before;
  std::vector<std::string> after;
};

struct ProposalRequest {
  Strategy strategy = Strategy::S3;
  int iteration = 0;
  /// Failure and success exemplars (S1) or before/after pairs (S2); empty for S3.
  std::vector<Exemplar> exemplars;
  std::vector<PredicateDecl> psi;
};

/// Builds a request from the transition dataset abstracted under `psi`.
/// At most `per_skill` exemplars of each (skill, outcome) are included.
ProposalRequest make_request(Strategy strategy, int iteration, const TransitionDataset& data,
                             const PredicateTable& psi, const PerceptionSetup& setup,
                             std::size_t per_skill = 3);

struct PoolEntry {
  Strategy strategy = Strategy::S1;
  std::set<std::string> after_success;
  std::set<std::string> after_failure;
  std::vector<std::string> requires_predicates;
  std::string source;
  PredicateDecl decl;
};

/// Scripted proposal pool. Each declaration is preceded by a header line
///   ;;@ S1|S2|S3 [after-success=Skill[,Skill]] [after-failure=Skill[,Skill]] [requires=Pred[,Pred]]
/// after-* conditions are alternatives; requires are all needed in psi.
struct ProposalPool {
  std::vector<PoolEntry> entries;

  static ProposalPool parse(const std::string& text);
  bool available(const PoolEntry& e, const ProposalRequest& req) const;
};

class ProposalSource {
public:
  virtual ~ProposalSource() = default;
  /// Raw proposals; propose() filters them.
  virtual std::vector<PredicateDecl> generate(const ProposalRequest& req) = 0;
};

class ScriptedProposer : public ProposalSource {
public:
  explicit ScriptedProposer(ProposalPool pool) : pool_(std::move(pool)) {}
  std::vector<PredicateDecl> generate(const ProposalRequest& req) override;

private:
  ProposalPool pool_;
};

struct ExternalConfig {
  /// e.g. "http://127.0.0.1:8080/propose"
  std::string endpoint;
  std::chrono::milliseconds timeout{10000};
  std::size_t max_proposals = 10;
};

using DiagnosticSink = std::function<void(const std::string&)>;

/// Posts the request as JSON and reads {"predicates": ["(primitive ...)", ...]}.
/// Transport failures and timeouts yield no proposals; malformed entries are
/// dropped and reported to `log`.
class ExternalProposer : public ProposalSource {
public:
  ExternalProposer(ExternalConfig cfg, DiagnosticSink log = {}) : cfg_(std::move(cfg)), log_(std::move(log)) {}
  std::vector<PredicateDecl> generate(const ProposalRequest& req) override;

private:
  ExternalConfig cfg_;
  DiagnosticSink log_;
};

std::string request_to_json(const ProposalRequest& req);
/// Parses a response document; unparsable declarations go to `log`.
std::vector<PredicateDecl> parse_response(const std::string& body, const DiagnosticSink& log = {});

/// Proposals that typecheck against psi (plus earlier accepted proposals) and
/// are not alpha-equivalent to anything already present. A proposal whose
/// name is taken by a different predicate is renamed Name2, Name3, ...
std::vector<PredicateDecl> filter_proposals(const std::vector<PredicateDecl>& raw, const PredicateTable& psi,
                                            const TypeTable& types, const DiagnosticSink& log = {});

std::vector<PredicateDecl> propose(const ProposalRequest& req, ProposalSource& source, const PredicateTable& psi,
                                   const TypeTable& types, const DiagnosticSink& log = {});

}  // namespace nsp
