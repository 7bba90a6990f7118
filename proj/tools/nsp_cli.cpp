#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nsp/experiment.hpp"
#include "nsp/pddl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Config problems exit 2, everything else that throws exits 1.
struct UsageError : nsp::Error {
  using nsp::Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw nsp::Error("cannot write '" + path.string() + "'");
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

nsp::Domain domain_or_usage(const std::string& name) {
  try {
    return nsp::make_domain(name);
  } catch (const nsp::UnknownDomain& e) {
    throw UsageError(e.what());
  }
}

void validate_or_usage(const nsp::RunConfig& cfg) {
  try {
    nsp::validate(cfg);
  } catch (const nsp::Error& e) {
    throw UsageError(e.what());
  }
}

struct Common {
  nsp::RunConfig cfg;
  std::size_t seeds = 1;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--domain", c.cfg.domain, "cover, cover_heavy, blocks, coffee or balance")->required();
  app->add_option("--seed", c.cfg.seed, "Seed of the first run");
  app->add_option("--seeds", c.seeds, "Number of consecutive seeds to run and aggregate")->check(CLI::PositiveNumber);
  app->add_option("--budget", c.cfg.n_abstract, "Abstract plans per task (0 = domain default)");
  app->add_option("--node-budget", c.cfg.node_budget, "Search nodes per task");
  app->add_option("--noise", c.cfg.noise, "Perception flip probability");
  app->add_option("--eval-tasks", c.cfg.eval_tasks, "Number of evaluation tasks");
  app->add_option("--parallel-tasks", c.cfg.workers, "Worker threads for per-task planning");
  app->add_option("--out", c.out, "Output directory");
}

void log_iteration(std::uint64_t seed, const nsp::IterationRecord& r) {
  std::cerr << "seed " << seed << " iter " << r.i << " rho=" << r.rho << " nu=" << r.nu
            << " |psi|=" << r.psi.size() << " hlas=" << r.num_hlas << (r.proposed ? " proposed" : "") << "\n";
}

json trace_records(const nsp::RunResult& r) {
  json out = json::array();
  for (auto rec : nsp::trace_json(r.online.trace)) {
    rec["seed"] = r.config.seed;
    out.push_back(std::move(rec));
  }
  return out;
}

void export_pddl(const fs::path& dir, const nsp::RunResult& r) {
  const auto d = nsp::make_domain(r.config.domain);
  const auto tasks = d.tasks->test(1, r.config.seed);
  const nsp::Perceiver perceiver(d.spec.registry, {r.config.noise, r.config.seed});
  const auto& model = r.online.best;
  const auto init = nsp::abstract_state(tasks.front().init, model.predicates, d.spec.types, perceiver, {});
  const auto ex = nsp::export_planning_model(model, d.spec.types, tasks.front(), init, r.config.domain);
  fs::create_directories(dir);
  write_file(dir / "domain.pddl", ex.domain);
  write_file(dir / "problem.pddl", ex.problem);
}

int cmd_run(const Common& c, bool save_dataset, bool pddl, bool quiet) {
  validate_or_usage(c.cfg);
  std::vector<nsp::RunResult> runs;
  std::vector<json> metrics;
  for (std::size_t k = 0; k < c.seeds; ++k) {
    auto cfg = c.cfg;
    cfg.seed = c.cfg.seed + k;
    auto progress = [&](const nsp::IterationRecord& r) {
      if (!quiet) log_iteration(cfg.seed, r);
    };
    auto log = [&](const std::string& msg) {
      if (!quiet) std::cerr << msg << "\n";
    };
    runs.push_back(nsp::run_experiment(cfg, progress, log));
    metrics.push_back(nsp::metrics_json(runs.back()));
  }
  const json doc = c.seeds == 1 ? metrics.front() : nsp::aggregate_json(metrics);
  if (c.out.empty()) {
    std::cout << dump(doc);
    return 0;
  }
  const fs::path dir(c.out);
  fs::create_directories(dir);
  write_file(dir / "metrics.json", dump(doc));
  write_file(dir / "timing.json", dump(nsp::timing_json(runs)));
  std::string trace;
  for (const auto& r : runs) {
    for (const auto& rec : trace_records(r)) trace += rec.dump() + "\n";
  }
  write_file(dir / "trace.jsonl", trace);
  for (const auto& r : runs) {
    const std::string suffix = c.seeds == 1 ? "" : "-seed" + std::to_string(r.config.seed);
    write_file(dir / ("model" + suffix + ".txt"), nsp::print_model(r.online.best));
    if (save_dataset) write_file(dir / ("dataset" + suffix + ".json"), nsp::dataset_json(r.online.data).dump() + "\n");
    if (pddl) export_pddl(dir / ("pddl" + suffix), r);
  }
  std::cout << "solve_rate " << (c.seeds == 1 ? doc["eval"]["solve_rate"] : doc["aggregate"]["solve_rate"]) << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& model_spec) {
  validate_or_usage(c.cfg);
  const auto d = domain_or_usage(c.cfg.domain);
  nsp::Model model;
  try {
    model = nsp::load_model(model_spec, d.spec);
  } catch (const nsp::Error& e) {
    throw UsageError(e.what());
  }
  std::vector<json> metrics;
  for (std::size_t k = 0; k < c.seeds; ++k) {
    auto cfg = c.cfg;
    cfg.seed = c.cfg.seed + k;
    const auto report = nsp::evaluate_model(cfg, model);
    metrics.push_back({{"domain", cfg.domain},
                       {"seed", cfg.seed},
                       {"model", model_spec},
                       {"config", nsp::config_json(cfg)},
                       {"eval", nsp::eval_json(report, nsp::planner_config(cfg, d.spec).n_abstract)}});
  }
  const json doc = c.seeds == 1 ? metrics.front() : nsp::aggregate_json(metrics);
  if (c.out.empty()) {
    std::cout << dump(doc);
  } else {
    fs::create_directories(c.out);
    write_file(fs::path(c.out) / "metrics.json", dump(doc));
    std::cout << "solve_rate " << (c.seeds == 1 ? doc["eval"]["solve_rate"] : doc["aggregate"]["solve_rate"]) << "\n";
  }
  return 0;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

int inspect_model(const std::string& path, const std::string& domain) {
  const auto d = domain_or_usage(domain);
  nsp::Model model;
  if (path == "oracle" || path == "initial") {
    model = nsp::load_model(path, d.spec);
  } else {
    try {
      model = nsp::parse_model(read_file(path), d.spec.types);
    } catch (const nsp::ParseError& e) {
      throw UsageError(path + ": " + e.what());
    }
  }
  std::cout << nsp::print_model(model);
  return 0;
}

int inspect_trace(const std::string& path) {
  std::istringstream in(read_file(path));
  std::cout << std::left << std::setw(6) << "seed" << std::setw(6) << "iter" << std::setw(10) << "rho"
            << std::setw(8) << "nu" << std::setw(10) << "proposed" << std::setw(6) << "|psi|" << std::setw(6)
            << "hlas" << "data\n";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json r;
    try {
      r = json::parse(line);
      std::ostringstream rho;
      rho << std::fixed << std::setprecision(3) << r.at("rho").get<double>();
      std::cout << std::setw(6) << r.value("seed", 0) << std::setw(6) << r.at("i").get<int>() << std::setw(10)
                << rho.str() << std::setw(8) << r.at("nu").get<std::size_t>() << std::setw(10)
                << (r.at("proposed").get<bool>() ? "yes" : "no") << std::setw(6) << r.at("predicates").size()
                << std::setw(6) << r.at("num_hlas").get<std::size_t>() << r.at("data_size").get<std::size_t>()
                << "\n";
    } catch (const json::exception& e) {
      throw UsageError("malformed trace record in '" + path + "': " + e.what());
    }
  }
  return 0;
}

int inspect_dataset(const std::string& path, const std::string& domain) {
  const auto d = domain_or_usage(domain);
  nsp::TransitionDataset data;
  try {
    data = nsp::dataset_from_json(parse_json_file(path), d.spec);
  } catch (const UsageError&) {
    throw;
  } catch (const nsp::Error& e) {
    throw UsageError(e.what());
  }
  std::cout << data.num_positives() << " positives, " << data.num_negatives() << " negatives\n";
  for (const auto& t : data.trajectories) {
    std::cout << "task " << t.task_id << ": " << t.skills.size() << " steps";
    if (t.failed) std::cout << ", failed " << t.failed->spec.name;
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic world-model learning with predicate invention"};
  app.require_subcommand(1);

  Common run_opts;
  bool save_dataset = false, pddl = false, quiet = false;
  auto* run = app.add_subcommand("run", "Learn a model online, then evaluate it");
  add_common(run, run_opts);
  run->add_option("--max-iters", run_opts.cfg.max_iters, "Online learning iterations");
  run->add_option("--alpha", run_opts.cfg.alpha, "Precondition complexity weight");
  run->add_option("--alpha-sel", run_opts.cfg.alpha_sel, "Predicate-set complexity weight");
  run->add_option("--k-switch", run_opts.cfg.k_switch, "Satisficing plans needed to switch selection objective");
  run->add_option("--proposer", run_opts.cfg.proposer, "scripted or external:<endpoint>");
  run->add_flag("--save-dataset", save_dataset, "Write the transition dataset");
  run->add_flag("--export-pddl", pddl, "Write PDDL domain and problem for the first eval task");
  run->add_flag("--quiet", quiet, "No progress on stderr");

  Common eval_opts;
  std::string model_spec;
  auto* eval = app.add_subcommand("eval", "Evaluate a frozen model");
  add_common(eval, eval_opts);
  eval->add_option("--model", model_spec, "oracle, initial or learned:<path>")->required();

  std::string what, path, inspect_domain;
  auto* inspect = app.add_subcommand("inspect", "Print a model, trace or dataset");
  inspect->add_option("what", what, "model, trace or dataset")
      ->required()
      ->check(CLI::IsMember({"model", "trace", "dataset"}));
  inspect->add_option("path", path, "File to print (model also accepts oracle or initial)")->required();
  inspect->add_option("--domain", inspect_domain, "Domain of the model or dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, save_dataset, pddl, quiet);
    if (eval->parsed()) return cmd_eval(eval_opts, model_spec);
    if (what == "trace") return inspect_trace(path);
    if (inspect_domain.empty()) throw UsageError("inspect " + what + " needs --domain");
    if (what == "model") return inspect_model(path, inspect_domain);
    return inspect_dataset(path, inspect_domain);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
