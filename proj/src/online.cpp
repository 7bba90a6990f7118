#include "nsp/online.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <thread>

namespace nsp {

TaskAttempt attempt_task(const Model& model, Environment& env, const Task& task, const PlannerConfig& pc,
                         const PerceptionSetup& setup) {
  TaskAttempt out;
  out.task_id = task.id;
  out.impossible = task.impossible;
  const auto init = abstract_state(task.init, model.predicates, *setup.types, *setup.perceiver, {}, setup.opts);
  PlanStream stream(model.predicates, model.operators, task, init, pc);
  std::set<std::vector<GroundSkill>> seen;
  while (auto plan = stream.next()) {
    std::vector<GroundSkill> skills;
    for (const auto& s : plan->steps) skills.push_back(s.skill);
    if (!seen.insert(skills).second) ++out.duplicate_plans;
    if (!validate_plan(*plan, init, task.goal, model.predicates, task.objects())) ++out.invalid_plans;
    auto outcome = execute_hierarchically(*plan, env, task, model.predicates, setup);
    ++out.plans_executed;
    if (outcome.kind == OutcomeKind::Satisficing) {
      out.solved = true;
      out.satisficing = outcome.data;
      out.data.push_back(std::move(outcome.data));
      break;
    }
    out.data.push_back(std::move(outcome.data));
  }
  out.nodes = stream.stats().expanded;
  out.no_plan = stream.emitted() == 0;
  if (task.impossible) out.solved = out.no_plan;
  return out;
}

std::vector<TaskAttempt> attempt_tasks(const Model& model, const EnvFactory& make_env, const std::vector<Task>& tasks,
                                       const PlannerConfig& pc, const PerceptionSetup& setup, std::size_t workers) {
  std::vector<TaskAttempt> out(tasks.size());
  workers = std::max<std::size_t>(1, std::min(workers, tasks.size()));
  if (workers == 1) {
    auto env = make_env();
    for (std::size_t i = 0; i < tasks.size(); ++i) out[i] = attempt_task(model, *env, tasks[i], pc, setup);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      auto env = make_env();
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        out[i] = attempt_task(model, *env, tasks[i], pc, setup);
      }
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

ExploreResult explore(const Model& model, const EnvFactory& make_env, const std::vector<Task>& tasks,
                      const PlannerConfig& pc, const PerceptionSetup& setup, std::size_t workers) {
  ExploreResult r;
  r.attempts = attempt_tasks(model, make_env, tasks, pc, setup, workers);
  std::size_t solved = 0;
  for (auto& a : r.attempts) {
    if (a.solved) ++solved;
    r.nu += a.plans_executed - (a.satisficing ? 1 : 0);
    for (auto& t : a.data) r.data.add(t);
  }
  r.rho = tasks.empty() ? 0.0 : static_cast<double>(solved) / static_cast<double>(tasks.size());
  return r;
}

bool should_propose(int i, double rho, std::size_t nu, double prev_rho, std::size_t prev_nu) {
  if (i == 1) return true;
  return rho <= prev_rho || (rho == prev_rho && nu > prev_nu);
}

std::vector<HLA> merge_initial_hlas(const std::vector<HLA>& initial, std::vector<HLA> learned,
                                    const PredicateTable& psi, const std::set<std::string>& goal_predicates) {
  auto same_effects = [](HLA a, HLA b) {
    a.pre.clear();
    b.pre.clear();
    return a.skill.name == b.skill.name && equivalent_up_to_renaming(a, b);
  };
  auto in_psi = [&](const HLA& h) {
    for (const auto* set : {&h.pre, &h.add, &h.del}) {
      for (const auto& a : *set) {
        if (!psi.contains(a.predicate)) return false;
      }
    }
    return true;
  };
  std::vector<HLA> kept;
  for (const auto& h : initial) {
    if (!h.pre.empty() && in_psi(h)) {
      std::erase_if(learned, [&](const HLA& l) { return same_effects(l, h); });
      kept.push_back(h);
      continue;
    }
    std::set<std::string> goal_adds;
    for (const auto& a : h.add) {
      if (goal_predicates.count(a.predicate)) goal_adds.insert(a.predicate);
    }
    bool needed = false;
    for (const auto& g : goal_adds) {
      const bool covered = std::any_of(learned.begin(), learned.end(), [&](const HLA& l) {
        return l.skill.name == h.skill.name &&
               std::any_of(l.add.begin(), l.add.end(), [&](const LiftedAtom& a) { return a.predicate == g; });
      });
      needed = needed || !covered;
    }
    if (!needed) continue;
    HLA k = h;
    for (auto* set : {&k.pre, &k.add, &k.del}) {
      std::erase_if(*set, [&](const LiftedAtom& a) { return !psi.contains(a.predicate); });
    }
    // Inherit the preconditions over skill arguments that every learned HLA
    // of the skill shares.
    std::optional<LiftedAtomSet> common;
    for (const auto& l : learned) {
      if (l.skill.name != h.skill.name) continue;
      std::map<std::string, std::string> to_initial;
      for (std::size_t i = 0; i < l.skill_args.size() && i < h.skill_args.size(); ++i) {
        to_initial[l.skill_args[i]] = h.skill_args[i];
      }
      LiftedAtomSet mapped;
      for (const auto& a : l.pre) {
        LiftedAtom m{a.predicate, {}};
        for (const auto& v : a.vars) {
          if (!to_initial.count(v)) break;
          m.vars.push_back(to_initial[v]);
        }
        if (m.vars.size() == a.vars.size()) mapped.insert(std::move(m));
      }
      if (!common) {
        common = std::move(mapped);
      } else {
        std::erase_if(*common, [&](const LiftedAtom& a) { return !mapped.count(a); });
      }
    }
    if (common) k.pre.insert(common->begin(), common->end());
    kept.push_back(std::move(k));
  }
  learned.insert(learned.end(), kept.begin(), kept.end());
  return learned;
}

namespace {

std::vector<SatisficingPlan> abstract_plans(const std::vector<std::pair<Trajectory, std::vector<GroundAtom>>>& plans,
                                            const PredicateTable& table, const PerceptionSetup& setup) {
  std::vector<SatisficingPlan> out;
  for (const auto& [t, goal] : plans) {
    SatisficingPlan p;
    p.task_id = t.task_id;
    for (auto& s : abstract_trajectory(t, table, setup)) p.states.push_back(std::move(s.atoms));
    p.skills = t.skills;
    p.goal = goal;
    p.objects = std::make_shared<const std::vector<Object>>(t.states.front().objects);
    out.push_back(std::move(p));
  }
  return out;
}

bool better(double rho, std::size_t nu, double best_rho, std::size_t best_nu) {
  return rho > best_rho || (rho == best_rho && nu < best_nu);
}

}  // namespace

OnlineResult run_online(const DomainSpec& spec, const EnvFactory& make_env, const std::vector<Task>& tasks,
                        ProposalSource& proposer, const OnlineConfig& cfg, TransitionDataset d0,
                        const ProgressSink& progress) {
  OnlineResult res;
  res.data = std::move(d0);
  const Perceiver perceiver(spec.registry, cfg.perceiver);
  const PerceptionSetup setup{&spec.types, &perceiver, {}};
  Model model = spec.initial;
  double prev_rho = -std::numeric_limits<double>::infinity();
  std::size_t prev_nu = std::numeric_limits<std::size_t>::max();
  std::vector<std::pair<Trajectory, std::vector<GroundAtom>>> plans;
  std::set<std::pair<int, std::vector<GroundSkill>>> plan_keys;
  int proposing_rounds = 0;

  for (int i = 1; i <= cfg.max_iters; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.i = i;
    rec.prev_rho = prev_rho;
    rec.prev_nu = prev_nu;
    auto ex = explore(model, make_env, tasks, cfg.planner, setup, cfg.workers);
    rec.rho = ex.rho;
    rec.nu = ex.nu;
    for (const auto& a : ex.attempts) {
      rec.invalid_plans += a.invalid_plans;
      rec.duplicate_plans += a.duplicate_plans;
    }
    if (better(ex.rho, ex.nu, res.rho_best, res.nu_best)) {
      res.best = model;
      res.rho_best = ex.rho;
      res.nu_best = ex.nu;
      rec.improved_best = true;
    }
    rec.rho_best = res.rho_best;
    rec.nu_best = res.nu_best;
    auto finish = [&]() {
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rec.data_size = res.data.size();
      res.trace.push_back(rec);
      if (progress) progress(rec);
    };
    if (ex.nu == 0) {
      rec.psi = model.predicates.names();
      rec.num_hlas = model.operators.size();
      finish();
      break;
    }
    res.data.append(ex.data);
    for (std::size_t k = 0; k < ex.attempts.size(); ++k) {
      const auto& a = ex.attempts[k];
      if (!a.satisficing) continue;
      if (plan_keys.insert({a.task_id, a.satisficing->skills}).second) {
        plans.emplace_back(*a.satisficing, tasks[k].goal);
      }
    }

    PredicateTable candidates = model.predicates;
    if (should_propose(i, ex.rho, ex.nu, prev_rho, prev_nu)) {
      rec.proposed = true;
      ++res.proposal_calls;
      const Strategy alt = proposing_rounds % 2 == 0 ? Strategy::S1 : Strategy::S2;
      ++proposing_rounds;
      std::vector<PredicateDecl> extra;
      for (Strategy s : {Strategy::S3, alt}) {
        rec.strategies.push_back(strategy_name(s));
        const auto req = make_request(s, i, res.data, model.predicates, setup);
        const auto table = candidates;
        for (auto& d : propose(req, proposer, table, spec.types)) {
          candidates = candidates.with({d}, spec.types);
          extra.push_back(std::move(d));
        }
      }
      rec.num_proposed = extra.size();
    }
    rec.num_candidates = candidates.size();

    const auto abs = abstract_dataset(res.data, candidates, setup);
    const auto sat = abstract_plans(plans, candidates, setup);
    const auto base = spec.initial.predicates.names();
    const auto psi = select_predicates(candidates, abs, {base.begin(), base.end()}, spec.types, sat, cfg.selection);
    const auto names = psi.names();
    auto learned = learn_hlas(abs.restrict({names.begin(), names.end()}), psi, cfg.selection.learner);
    model = Model{psi, merge_initial_hlas(spec.initial.operators, std::move(learned), psi, spec.goal_predicates)};
    rec.psi = psi.names();
    rec.num_hlas = model.operators.size();
    prev_rho = ex.rho;
    prev_nu = ex.nu;
    finish();
  }
  return res;
}

EvalReport evaluate(const Model& model, const EnvFactory& make_env, const std::vector<Task>& tasks,
                    const PlannerConfig& pc, const PerceptionSetup& setup, std::size_t workers) {
  EvalReport r;
  r.tasks = attempt_tasks(model, make_env, tasks, pc, setup, workers);
  std::size_t plans_solved = 0;
  double nodes = 0;
  for (const auto& a : r.tasks) {
    if (a.solved) {
      ++r.solved;
      plans_solved += a.plans_executed;
    }
    if (a.impossible) {
      ++r.impossible;
      if (a.no_plan) ++r.impossible_detected;
    }
    nodes += static_cast<double>(a.nodes);
    r.invalid_plans += a.invalid_plans;
    r.duplicate_plans += a.duplicate_plans;
  }
  const double n = static_cast<double>(tasks.size());
  r.solve_rate = tasks.empty() ? 0.0 : static_cast<double>(r.solved) / n;
  r.plans_per_solved = r.solved ? static_cast<double>(plans_solved) / static_cast<double>(r.solved) : 0.0;
  r.budget_fraction = r.plans_per_solved / static_cast<double>(std::max(pc.n_abstract, 1));
  r.mean_nodes = tasks.empty() ? 0.0 : nodes / n;
  return r;
}

}  // namespace nsp
