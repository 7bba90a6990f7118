#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsp/envs.hpp"
#include "nsp/online.hpp"

namespace nsp {

/// One learning + evaluation run. Zero-valued n_abstract picks the domain default.
struct RunConfig {
  std::string domain = "cover";
  std::uint64_t seed = 0;
  int max_iters = 10;
  int n_abstract = 0;
  std::size_t node_budget = 100000;
  double alpha = -0.01;
  double alpha_sel = -0.01;
  std::size_t k_switch = 1;
  double noise = 0.0;
  /// "scripted" or "external:<url>".
  std::string proposer = "scripted";
  std::size_t eval_tasks = 50;
  std::size_t workers = 1;
};

/// Throws Error on unknown domains, bad proposer specs and out-of-range values.
void validate(const RunConfig& cfg);

PlannerConfig planner_config(const RunConfig& cfg, const DomainSpec& spec);
EnvFactory env_factory(const std::string& domain);
std::unique_ptr<ProposalSource> make_proposer(const RunConfig& cfg, const DomainSpec& spec,
                                              const DiagnosticSink& log = {});

struct RunResult {
  RunConfig config;
  OnlineResult online;
  EvalReport eval;
  double learn_seconds = 0.0;
  double eval_seconds = 0.0;
};

RunResult run_experiment(const RunConfig& cfg, const ProgressSink& progress = {}, const DiagnosticSink& log = {});

/// Evaluates a frozen model on the config's eval tasks (test split, seeded by cfg.seed).
EvalReport evaluate_model(const RunConfig& cfg, const Model& model);

/// Which shipped or saved model to evaluate: "oracle", "initial" or "learned:<path>".
/// Throws Error on a bad spec or an unreadable file.
Model load_model(const std::string& spec, const DomainSpec& domain);

// Metrics documents hold no wall-clock values, so equal seeds give equal bytes.
nlohmann::json config_json(const RunConfig& cfg);
nlohmann::json eval_json(const EvalReport& r, int n_abstract);
nlohmann::json trace_json(const std::vector<IterationRecord>& trace);
nlohmann::json metrics_json(const RunResult& r);
/// Per-seed documents plus means of the numeric eval fields.
nlohmann::json aggregate_json(const std::vector<nlohmann::json>& per_seed);
nlohmann::json timing_json(const std::vector<RunResult>& runs);

nlohmann::json dataset_json(const TransitionDataset& d);
TransitionDataset dataset_from_json(const nlohmann::json& j, const DomainSpec& spec);

}  // namespace nsp
