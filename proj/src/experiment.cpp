#include "nsp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nsp {

using nlohmann::json;

namespace {

const std::string kExternal = "external:";

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void validate(const RunConfig& cfg) {
  const auto names = domain_names();
  if (std::find(names.begin(), names.end(), cfg.domain) == names.end()) throw UnknownDomain(cfg.domain);
  if (cfg.max_iters < 0) throw Error("--max-iters must be >= 0");
  if (cfg.n_abstract < 0) throw Error("--budget must be >= 0");
  if (cfg.node_budget == 0) throw Error("--node-budget must be positive");
  if (!(cfg.noise >= 0.0 && cfg.noise <= 1.0)) throw Error("--noise must lie in [0, 1]");
  if (!std::isfinite(cfg.alpha) || !std::isfinite(cfg.alpha_sel)) throw Error("--alpha values must be finite");
  if (cfg.eval_tasks == 0) throw Error("--eval-tasks must be positive");
  if (cfg.workers == 0) throw Error("--parallel-tasks must be positive");
  if (cfg.proposer != "scripted") {
    if (cfg.proposer.rfind(kExternal, 0) != 0 || cfg.proposer.size() == kExternal.size()) {
      throw Error("--proposer must be 'scripted' or 'external:<endpoint>'");
    }
  }
}

PlannerConfig planner_config(const RunConfig& cfg, const DomainSpec& spec) {
  PlannerConfig pc;
  pc.n_abstract = cfg.n_abstract > 0 ? cfg.n_abstract : spec.n_abstract;
  pc.node_budget = cfg.node_budget;
  return pc;
}

EnvFactory env_factory(const std::string& domain) {
  return [domain]() { return std::move(make_domain(domain).env); };
}

std::unique_ptr<ProposalSource> make_proposer(const RunConfig& cfg, const DomainSpec& spec,
                                              const DiagnosticSink& log) {
  if (cfg.proposer == "scripted") return std::make_unique<ScriptedProposer>(ProposalPool::parse(spec.pool));
  ExternalConfig ec;
  ec.endpoint = cfg.proposer.substr(kExternal.size());
  return std::make_unique<ExternalProposer>(ec, log);
}

EvalReport evaluate_model(const RunConfig& cfg, const Model& model) {
  validate(cfg);
  const auto d = make_domain(cfg.domain);
  const Perceiver perceiver(d.spec.registry, {cfg.noise, cfg.seed});
  const PerceptionSetup setup{&d.spec.types, &perceiver, {}};
  const auto tests = d.tasks->test(cfg.eval_tasks, cfg.seed);
  return evaluate(model, env_factory(cfg.domain), tests, planner_config(cfg, d.spec), setup, cfg.workers);
}

RunResult run_experiment(const RunConfig& cfg, const ProgressSink& progress, const DiagnosticSink& log) {
  validate(cfg);
  const auto d = make_domain(cfg.domain);
  OnlineConfig oc;
  oc.max_iters = cfg.max_iters;
  oc.planner = planner_config(cfg, d.spec);
  oc.selection.alpha_sel = cfg.alpha_sel;
  oc.selection.k_switch = cfg.k_switch;
  oc.selection.learner.alpha = cfg.alpha;
  oc.perceiver = {cfg.noise, cfg.seed};
  oc.workers = cfg.workers;
  auto proposer = make_proposer(cfg, d.spec, log);

  RunResult r;
  r.config = cfg;
  auto t0 = std::chrono::steady_clock::now();
  r.online = run_online(d.spec, env_factory(cfg.domain), d.tasks->train(d.spec.n_train, cfg.seed), *proposer, oc, {},
                        progress);
  if (r.online.trace.empty()) r.online.best = d.spec.initial;
  r.learn_seconds = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  r.eval = evaluate_model(cfg, r.online.best);
  r.eval_seconds = seconds_since(t0);
  return r;
}

Model load_model(const std::string& spec, const DomainSpec& domain) {
  if (spec == "oracle") return domain.oracle;
  if (spec == "initial") return domain.initial;
  const std::string prefix = "learned:";
  if (spec.rfind(prefix, 0) != 0) throw Error("--model must be oracle, initial or learned:<path>");
  const auto path = spec.substr(prefix.size());
  std::ifstream in(path);
  if (!in) throw Error("cannot read model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), domain.types);
}

json config_json(const RunConfig& cfg) {
  return {{"domain", cfg.domain},         {"seed", cfg.seed},           {"max_iters", cfg.max_iters},
          {"n_abstract", cfg.n_abstract}, {"node_budget", cfg.node_budget}, {"alpha", cfg.alpha},
          {"alpha_sel", cfg.alpha_sel},   {"k_switch", cfg.k_switch},   {"noise", cfg.noise},
          {"proposer", cfg.proposer},     {"eval_tasks", cfg.eval_tasks}};
}

json eval_json(const EvalReport& r, int n_abstract) {
  json tasks = json::array();
  for (const auto& a : r.tasks) {
    tasks.push_back({{"id", a.task_id},
                     {"solved", a.solved},
                     {"impossible", a.impossible},
                     {"no_plan", a.no_plan},
                     {"plans", a.plans_executed},
                     {"nodes", a.nodes}});
  }
  return {{"tasks", r.tasks.size()},
          {"solved", r.solved},
          {"solve_rate", r.solve_rate},
          {"plans_per_solved", r.plans_per_solved},
          {"plans_used_fraction", r.budget_fraction},
          {"n_abstract", n_abstract},
          {"mean_nodes", r.mean_nodes},
          {"impossible", r.impossible},
          {"impossible_detected", r.impossible_detected},
          {"invalid_plans", r.invalid_plans},
          {"duplicate_plans", r.duplicate_plans},
          {"per_task", tasks}};
}

json trace_json(const std::vector<IterationRecord>& trace) {
  json out = json::array();
  for (const auto& t : trace) {
    out.push_back({{"i", t.i},
                   {"rho", t.rho},
                   {"nu", t.nu},
                   {"prev_rho", finite_or_null(t.prev_rho)},
                   {"prev_nu", t.i == 1 ? json(nullptr) : json(t.prev_nu)},
                   {"improved_best", t.improved_best},
                   {"proposed", t.proposed},
                   {"strategies", t.strategies},
                   {"num_proposed", t.num_proposed},
                   {"num_candidates", t.num_candidates},
                   {"predicates", t.psi},
                   {"num_hlas", t.num_hlas},
                   {"data_size", t.data_size},
                   {"invalid_plans", t.invalid_plans},
                   {"duplicate_plans", t.duplicate_plans},
                   {"rho_best", t.rho_best},
                   {"nu_best", t.nu_best}});
  }
  return out;
}

json metrics_json(const RunResult& r) {
  const auto d = make_domain(r.config.domain);
  const auto& o = r.online;
  return {{"domain", r.config.domain},
          {"seed", r.config.seed},
          {"config", config_json(r.config)},
          {"learning",
           {{"iterations", o.trace.size()},
            {"rho_best", finite_or_null(o.rho_best)},
            {"nu_best", o.trace.empty() ? json(nullptr) : json(o.nu_best)},
            {"proposal_calls", o.proposal_calls},
            {"predicates", o.best.predicates.names()},
            {"num_hlas", o.best.operators.size()},
            {"positives", o.data.num_positives()},
            {"negatives", o.data.num_negatives()}}},
          {"eval", eval_json(r.eval, planner_config(r.config, d.spec).n_abstract)},
          {"trace", trace_json(o.trace)}};
}

json aggregate_json(const std::vector<json>& per_seed) {
  json agg = {{"seeds", per_seed.size()}};
  for (const char* key : {"solve_rate", "plans_per_solved", "plans_used_fraction", "mean_nodes"}) {
    double sum = 0.0;
    for (const auto& m : per_seed) sum += m["eval"][key].get<double>();
    agg[key] = per_seed.empty() ? 0.0 : sum / static_cast<double>(per_seed.size());
  }
  return {{"runs", per_seed}, {"aggregate", agg}};
}

json timing_json(const std::vector<RunResult>& runs) {
  json out = json::array();
  for (const auto& r : runs) {
    out.push_back({{"seed", r.config.seed}, {"learn_seconds", r.learn_seconds}, {"eval_seconds", r.eval_seconds}});
  }
  return out;
}

namespace {

json facts_json(const std::set<Fact>& facts) {
  json out = json::array();
  for (const auto& f : facts) out.push_back({f.relation, f.args});
  return out;
}

std::set<Fact> facts_from(const json& j) {
  std::set<Fact> out;
  for (const auto& f : j) out.insert({f.at(0).get<std::string>(), f.at(1).get<std::vector<int>>()});
  return out;
}

json state_json(const FeatureState& s) {
  json objs = json::array();
  for (const auto& o : s.objects) objs.push_back({{"name", o.name}, {"type", o.type}, {"id", o.id}});
  json feats = json::object();
  for (const auto& [id, v] : s.features) feats[std::to_string(id)] = v;
  return {{"objects", objs},
          {"features", feats},
          {"scene", facts_json(s.scene)},
          {"occluded", facts_json(s.occluded)},
          {"step", s.step_index}};
}

FeatureState state_from(const json& j) {
  FeatureState s;
  for (const auto& o : j.at("objects")) {
    s.objects.push_back({o.at("name").get<std::string>(), o.at("type").get<std::string>(), o.at("id").get<int>()});
  }
  for (const auto& [k, v] : j.at("features").items()) s.features[std::stoi(k)] = v.get<std::vector<double>>();
  s.scene = facts_from(j.at("scene"));
  s.occluded = facts_from(j.at("occluded"));
  s.step_index = j.at("step").get<int>();
  return s;
}

json skill_json(const GroundSkill& g) { return {{"skill", g.spec.name}, {"args", g.args}}; }

GroundSkill skill_from(const json& j, const DomainSpec& spec) {
  const auto name = j.at("skill").get<std::string>();
  const auto it = std::find_if(spec.skills.begin(), spec.skills.end(), [&](const SkillSpec& s) { return s.name == name; });
  if (it == spec.skills.end()) throw Error("dataset names unknown skill '" + name + "'");
  return {*it, j.at("args").get<std::vector<int>>()};
}

}  // namespace

json dataset_json(const TransitionDataset& d) {
  json trajs = json::array();
  for (const auto& t : d.trajectories) {
    json states = json::array();
    for (const auto& s : t.states) states.push_back(state_json(s));
    json skills = json::array();
    for (const auto& g : t.skills) skills.push_back(skill_json(g));
    trajs.push_back({{"task", t.task_id},
                     {"states", states},
                     {"skills", skills},
                     {"failed", t.failed ? skill_json(*t.failed) : json(nullptr)}});
  }
  return {{"trajectories", trajs}};
}

TransitionDataset dataset_from_json(const json& j, const DomainSpec& spec) {
  TransitionDataset d;
  try {
    for (const auto& t : j.at("trajectories")) {
      Trajectory tr;
      tr.task_id = t.at("task").get<int>();
      for (const auto& s : t.at("states")) tr.states.push_back(state_from(s));
      for (const auto& g : t.at("skills")) tr.skills.push_back(skill_from(g, spec));
      if (!t.at("failed").is_null()) tr.failed = skill_from(t.at("failed"), spec);
      if (tr.states.size() != tr.skills.size() + 1) throw Error("trajectory needs one more state than skills");
      d.add(std::move(tr));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed dataset: ") + e.what());
  }
  return d;
}

}  // namespace nsp
