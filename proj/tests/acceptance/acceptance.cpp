// Acceptance checks. Usage: nsp_acceptance <path-to-nsp-cli>
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "../support/oracles.hpp"
#include "nsp/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nsp;

namespace {

std::string g_cli;
fs::path g_root;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code = -1;
  fs::path dir;
  double seconds = 0;
  json metrics;
};

CliRun cli(const std::string& name, const std::string& args) {
  CliRun r;
  r.dir = g_root / name;
  fs::remove_all(r.dir);
  const std::string cmd = "\"" + g_cli + "\" " + args + " --out \"" + r.dir.string() + "\" > \"" +
                          (g_root / (name + ".log")).string() + "\" 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (r.code == 0 && fs::exists(r.dir / "metrics.json")) r.metrics = json::parse(slurp(r.dir / "metrics.json"));
  return r;
}

std::vector<json> trace_of(const CliRun& r) {
  std::vector<json> out;
  std::istringstream in(slurp(r.dir / "trace.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

Model model_of(const CliRun& r, const DomainSpec& spec, const std::string& file = "model.txt") {
  return parse_model(slurp(r.dir / file), spec.types);
}

int g_failed = 0;

void report(int id, bool ok, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!ok) ++g_failed;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

// Every run and eval document collected for criteria 9 and 10.
std::vector<CliRun> g_runs;

CliRun record(CliRun r) {
  g_runs.push_back(r);
  return r;
}

const HLA* find_hla(const std::vector<HLA>& ops, const std::string& skill, const std::string& adds) {
  for (const auto& h : ops) {
    if (h.skill.name != skill) continue;
    for (const auto& a : h.add) {
      if (a.predicate == adds) return &h;
    }
  }
  return nullptr;
}

std::set<std::string> pre_predicates(const HLA& h) {
  std::set<std::string> out;
  for (const auto& a : h.pre) out.insert(a.predicate);
  return out;
}

// ---------------------------------------------------------------------------

void criterion1() {
  bool ok = true;
  std::string detail;
  for (const auto& d : domain_names()) {
    const auto r = record(cli("oracle_" + d, "eval --domain " + d + " --model oracle --eval-tasks 50"));
    const double rate = r.code == 0 ? r.metrics["eval"]["solve_rate"].get<double>() : -1;
    const double need = d == "coffee" ? 0.95 : 0.98;
    ok = ok && rate >= need && r.seconds < 120;
    detail += d + "=" + fmt(rate) + " (" + fmt(std::round(r.seconds * 10) / 10) + "s) ";
  }
  report(1, ok, "oracle solve rates " + detail);
}

CliRun g_cover;

void criterion2() {
  const auto spec = make_domain("cover").spec;
  std::set<std::string> oracle_names;
  for (const auto& n : spec.oracle.predicates.names()) oracle_names.insert(n);
  std::size_t distractors = 0;
  for (const auto& e : ProposalPool::parse(spec.pool).entries) distractors += oracle_names.count(e.decl.name) ? 0 : 1;
  g_cover = record(cli("cover", "run --domain cover --seed 0 --eval-tasks 50 --quiet"));
  if (g_cover.code != 0) return report(2, false, "run exited " + std::to_string(g_cover.code));
  const auto trace = trace_of(g_cover);
  const auto& ev = g_cover.metrics["eval"];
  const bool converged = !trace.empty() && trace.back()["nu"].get<std::size_t>() == 0;
  const double rate = ev["solve_rate"].get<double>();
  const double pps = ev["plans_per_solved"].get<double>();
  report(2, distractors >= 3 && converged && rate >= 0.95 && pps == 1.0,
         "distractors=" + std::to_string(distractors) + " nu_final=" + (converged ? "0" : "nonzero") +
             " solve_rate=" + fmt(rate) + " plans_per_solved=" + fmt(pps));
}

void criterion3() {
  const auto spec = make_domain("blocks").spec;
  const auto r = record(cli("blocks", "run --domain blocks --seed 0 --seeds 5 --eval-tasks 50 --quiet"));
  if (r.code != 0) return report(3, false, "run exited " + std::to_string(r.code));
  const auto& target = spec.oracle.operators;
  std::string detail;
  int exact = 0;
  for (int seed = 0; seed < 5; ++seed) {
    const auto learned = model_of(r, spec, "model-seed" + std::to_string(seed) + ".txt").operators;
    auto covered = [](const std::vector<HLA>& xs, const std::vector<HLA>& ys) {
      return std::all_of(xs.begin(), xs.end(), [&](const HLA& x) {
        return std::any_of(ys.begin(), ys.end(), [&](const HLA& y) { return equivalent_up_to_renaming(x, y); });
      });
    };
    const bool same = learned.size() == target.size() && covered(learned, target) && covered(target, learned);
    exact += same ? 1 : 0;
    detail += " seed" + std::to_string(seed) + "=" + (same ? "exact" : "differs");
  }
  report(3, exact == 5, "learned operators equal the reference set on " + std::to_string(exact) + "/5 seeds:" + detail);
}

void criterion4() {
  const auto d = make_domain("coffee");
  const auto r = record(cli("coffee", "run --domain coffee --seed 0 --eval-tasks 50 --save-dataset --quiet"));
  if (r.code != 0) return report(4, false, "run exited " + std::to_string(r.code));
  const auto model = model_of(r, d.spec);
  const auto data = dataset_from_json(json::parse(slurp(r.dir / "dataset.json")), d.spec);
  const HLA* pour = find_hla(model.operators, "Pour", "CupFilled");
  const Perceiver perceiver(d.spec.registry, {0.0, 0});
  const PerceptionSetup setup{&d.spec.types, &perceiver, {}};
  LearnerConfig baseline;
  baseline.mode = PreconditionMode::Intersection;
  const auto inter = learn_hlas(abstract_dataset(data, model.predicates, setup), model.predicates, baseline);
  const HLA* pour_inter = find_hla(inter, "Pour", "CupFilled");
  const bool optimistic = pour && pre_predicates(*pour) == std::set<std::string>{"JugFilled", "RobotHoldingJug"};
  const bool conservative = pour_inter && pre_predicates(*pour_inter).count("JugInMachine");
  auto list = [](const HLA* h) {
    std::string s;
    if (!h) return std::string("none");
    for (const auto& p : pre_predicates(*h)) s += (s.empty() ? "" : ",") + p;
    return "{" + s + "}";
  };
  report(4, optimistic && conservative, "Pour pre=" + list(pour) + " intersection=" + list(pour_inter));
}

void criterion5() {
  const auto d = make_domain("balance");
  const auto r = record(cli("balance", "run --domain balance --seed 0 --eval-tasks 50 --quiet"));
  if (r.code != 0) return report(5, false, "run exited " + std::to_string(r.code));
  const auto model = model_of(r, d.spec);
  bool counting = false;
  for (const auto& decl : model.predicates.decls()) {
    counting = counting || (decl.is_derived() && print_decl(decl).find("(count=") != std::string::npos);
  }
  bool turn_on = false;
  for (const auto& h : model.operators) {
    if (h.skill.name == "TurnMachineOn") turn_on = turn_on || pre_predicates(h).count("BlocksDistributedEvenly");
  }
  const double rate = r.metrics["eval"]["solve_rate"].get<double>();
  report(5, counting && turn_on && rate >= 0.95,
         std::string("count= predicate selected=") + (counting ? "yes" : "no") +
             " TurnMachineOn needs BlocksDistributedEvenly=" + (turn_on ? "yes" : "no") + " solve_rate=" + fmt(rate));
}

void criterion6() {
  const auto r = record(cli("cover_heavy", "run --domain cover_heavy --seed 0 --eval-tasks 50 --quiet"));
  if (r.code != 0) return report(6, false, "run exited " + std::to_string(r.code));
  const auto& ev = r.metrics["eval"];
  const auto impossible = ev["impossible"].get<std::size_t>();
  const auto detected = ev["impossible_detected"].get<std::size_t>();
  const auto psi = r.metrics["learning"]["predicates"].get<std::vector<std::string>>();
  const bool weight = std::find(psi.begin(), psi.end(), "IsGreen") != psi.end();
  const double frac = impossible ? static_cast<double>(detected) / static_cast<double>(impossible) : 0.0;
  report(6, impossible > 0 && frac >= 0.95 && weight,
         std::to_string(detected) + "/" + std::to_string(impossible) + " impossible tasks without a plan, weight predicate " +
             (weight ? "selected" : "missing"));
}

void criterion7() {
  oracle::Rng rng(2024);
  int pre_checked = 0, pre_equal = 0;
  while (pre_checked < 200) {
    const auto inst = oracle::random_learning_instance(rng, 10, 0.6);
    const auto table = oracle::table_of(inst.sigs, {"P0", "P1", "P2", "P3", "P4"}, inst.types);
    for (const auto& part : cluster_effects(inst.data, table)) {
      if (pre_checked == 200) break;
      std::vector<const AtomSet*> states;
      for (auto m : part.members) states.push_back(&inst.data.positives[m].pre);
      std::vector<std::string> types;
      for (const auto& p : part.params) types.push_back(p.type);
      const auto cands = oracle::candidate_atoms(inst.sigs, types, states, part.bindings);
      if (cands.size() > 12) continue;
      std::vector<oracle::Other> others;
      std::set<std::size_t> members(part.members.begin(), part.members.end());
      for (std::size_t i = 0; i < inst.data.positives.size(); ++i) {
        const auto& p = inst.data.positives[i];
        if (p.skill.spec.name == part.skill.name && !members.count(i)) others.push_back({&p.pre, p.skill.args, p.objects.get()});
      }
      for (const auto& n : inst.data.negatives) {
        if (n.skill.spec.name == part.skill.name) others.push_back({&n.state, n.skill.args, n.objects.get()});
      }
      std::vector<oracle::PosAtom> got;
      for (const auto& a : learn_preconditions(part, inst.data)) got.push_back(oracle::to_pos(a));
      std::sort(got.begin(), got.end());
      pre_equal += got == oracle::best_precondition(cands, types, part.members.size(), others) ? 1 : 0;
      ++pre_checked;
    }
  }
  int score_equal = 0;
  for (int k = 0; k < 200; ++k) {
    const auto inst = oracle::random_learning_instance(rng, 10, 0.5);
    std::set<std::string> names;
    for (const auto& s : inst.sigs) {
      if (oracle::coin(rng, 0.6)) names.insert(s.name);
    }
    const auto psi = oracle::table_of(inst.sigs, names, inst.types);
    score_equal += score_predicate_set(inst.data, psi, -0.01) == oracle::brute_force_score(inst, names, -0.01) ? 1 : 0;
  }
  report(7, pre_equal == 200 && score_equal == 200,
         "preconditions " + std::to_string(pre_equal) + "/200, set scores " + std::to_string(score_equal) + "/200");
}

void criterion8() {
  oracle::Rng rng(8);
  int fix_ok = 0, strata_ok = 0, ident_ok = 0, frame_ok = 0;
  HLA noop;
  noop.name = "Noop";
  for (int k = 0; k < 500; ++k) {
    const auto inst = oracle::random_derived_instance(rng, 6);
    const auto s = oracle::random_atoms(rng, inst.primitives, inst.objects, 0.4);
    const auto closed = close_derived(s, inst.table, inst.objects);
    fix_ok += closed == close_derived_naive(s, inst.table, inst.objects) &&
              close_derived(closed, inst.table, inst.objects) == closed;

    bool mono = true;
    std::set<std::string> names;
    for (const auto& d : inst.table.decls()) {
      if (!d.is_derived()) names.insert(d.name);
    }
    for (const auto& stratum : inst.table.strata()) {
      names.insert(stratum.begin(), stratum.end());
      mono = mono && close_derived(s, inst.table.subset(names, inst.types), inst.objects) == oracle::project(closed, names);
    }
    strata_ok += mono;

    const AbstractState state{closed, true};
    GroundHLA empty;
    empty.hla = &noop;
    const auto same = apply(state, empty, inst.table, inst.objects);
    ident_ok += same && *same == state;

    GroundHLA g;
    g.hla = &noop;
    for (const auto& a : s) {
      if (oracle::coin(rng, 0.2)) g.pre.insert(a);
      if (oracle::coin(rng, 0.2)) g.del.insert(a);
    }
    for (const auto& a : oracle::random_atoms(rng, inst.primitives, inst.objects, 0.15)) {
      if (!g.del.count(a)) g.add.insert(a);
    }
    const auto next = apply(state, g, inst.table, inst.objects);
    bool frame = next.has_value();
    if (frame) {
      for (const auto& a : oracle::random_atoms(rng, inst.primitives, inst.objects, 1.0)) {
        if (g.add.count(a) || g.del.count(a)) continue;
        frame = frame && next->contains(a) == state.contains(a);
      }
      for (const auto& a : g.add) frame = frame && next->contains(a);
      for (const auto& a : g.del) frame = frame && !next->contains(a);
    }
    frame_ok += frame;
  }
  report(8, fix_ok == 500 && strata_ok == 500 && ident_ok == 500 && frame_ok == 500,
         "fixpoint " + std::to_string(fix_ok) + "/500, strata " + std::to_string(strata_ok) + "/500, identity " +
             std::to_string(ident_ok) + "/500, frame " + std::to_string(frame_ok) + "/500");
}

void criterion9() {
  std::size_t invalid = 0, duplicate = 0, docs = 0;
  auto count = [&](const json& ev) {
    invalid += ev["invalid_plans"].get<std::size_t>();
    duplicate += ev["duplicate_plans"].get<std::size_t>();
  };
  for (const auto& r : g_runs) {
    if (r.code != 0) continue;
    ++docs;
    if (r.metrics.contains("runs")) {
      for (const auto& m : r.metrics["runs"]) count(m["eval"]);
    } else {
      count(r.metrics["eval"]);
    }
    if (fs::exists(r.dir / "trace.jsonl")) {
      for (const auto& t : trace_of(r)) {
        invalid += t["invalid_plans"].get<std::size_t>();
        duplicate += t["duplicate_plans"].get<std::size_t>();
      }
    }
  }
  oracle::Rng rng(9);
  int h_ok = 0;
  const auto sigs = oracle::primitive_vocabulary();
  for (int k = 0; k < 500; ++k) {
    const auto objs = oracle::random_objects(rng, oracle::uniform(rng, 3, 6));
    const AbstractState s{oracle::random_atoms(rng, sigs, objs, 0.5), true};
    const auto goal_set = oracle::random_atoms(rng, sigs, objs, 0.2);
    std::size_t missing = 0;
    for (const auto& g : goal_set) missing += s.contains(g) ? 0 : 1;
    h_ok += goal_count_h(s, {goal_set.begin(), goal_set.end()}) == missing;
  }
  report(9, docs > 0 && invalid == 0 && duplicate == 0 && h_ok == 500,
         "over " + std::to_string(docs) + " runs: invalid plans " + std::to_string(invalid) + ", duplicate plans " +
             std::to_string(duplicate) + "; goal-count " + std::to_string(h_ok) + "/500");
}

void criterion10() {
  std::size_t records = 0, bad_order = 0, bad_gate = 0;
  for (const auto& r : g_runs) {
    if (r.code != 0 || !fs::exists(r.dir / "trace.jsonl")) continue;
    std::map<int, std::pair<double, long>> last;  // per seed: (rho_best, -nu_best)
    for (const auto& t : trace_of(r)) {
      ++records;
      const int seed = t["seed"].get<int>();
      const std::pair<double, long> cur{t["rho_best"].get<double>(), -static_cast<long>(t["nu_best"].get<std::size_t>())};
      if (last.count(seed) && cur < last[seed]) ++bad_order;
      last[seed] = cur;
      const int i = t["i"].get<int>();
      const double rho = t["rho"].get<double>();
      const auto nu = t["nu"].get<std::size_t>();
      bool expect = nu != 0;
      if (expect && i > 1) {
        const double prev_rho = t["prev_rho"].get<double>();
        const auto prev_nu = t["prev_nu"].get<std::size_t>();
        expect = rho <= prev_rho || (rho == prev_rho && nu > prev_nu);
      }
      if (t["proposed"].get<bool>() != expect) ++bad_gate;
    }
  }
  const auto again = cli("cover_again", "run --domain cover --seed 0 --eval-tasks 50 --quiet");
  const auto blocks_a = cli("blocks_a", "run --domain blocks --seed 2 --eval-tasks 20 --quiet");
  const auto blocks_b = cli("blocks_b", "run --domain blocks --seed 2 --eval-tasks 20 --quiet");
  const bool identical = again.code == 0 && blocks_a.code == 0 && blocks_b.code == 0 &&
                         slurp(again.dir / "metrics.json") == slurp(g_cover.dir / "metrics.json") &&
                         slurp(blocks_a.dir / "metrics.json") == slurp(blocks_b.dir / "metrics.json");
  report(10, records > 0 && bad_order == 0 && bad_gate == 0 && identical,
         std::to_string(records) + " iterations: order violations " + std::to_string(bad_order) +
             ", gating mismatches " + std::to_string(bad_gate) + ", repeated metrics " +
             (identical ? "byte-identical" : "DIFFER"));
}

void criterion11() {
  const auto r = record(cli("cover_initial", "eval --domain cover --model initial --eval-tasks 50"));
  if (r.code != 0 || g_cover.code != 0) return report(11, false, "eval exited " + std::to_string(r.code));
  const double initial = r.metrics["eval"]["solve_rate"].get<double>();
  const double learned = g_cover.metrics["eval"]["solve_rate"].get<double>();
  report(11, learned - initial >= 0.20, "initial=" + fmt(initial) + " learned=" + fmt(learned));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: nsp_acceptance <nsp-cli>\n";
    return 2;
  }
  g_cli = argv[1];
  g_root = fs::temp_directory_path() / "nsp_acceptance";
  fs::create_directories(g_root);
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) + " criteria failed") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
