#include <doctest.h>

#include <limits>

#include "nsp/experiment.hpp"

using namespace nsp;

namespace {

// The proposal condition, written out independently.
bool line12(int i, double rho, std::size_t nu, double prev_rho, std::size_t prev_nu) {
  if (i == 1) return true;
  if (rho < prev_rho) return true;
  if (rho == prev_rho) return true;
  return rho == prev_rho && nu > prev_nu;
}

RunConfig quick(const std::string& domain, std::uint64_t seed) {
  RunConfig c;
  c.domain = domain;
  c.seed = seed;
  c.eval_tasks = 10;
  return c;
}

}  // namespace

TEST_CASE("proposal gating") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(should_propose(1, 0.5, 3, -inf, std::numeric_limits<std::size_t>::max()));
  CHECK_FALSE(should_propose(2, 0.6, 9, 0.5, 3));
  CHECK(should_propose(2, 0.5, 3, 0.5, 3));
  CHECK(should_propose(2, 0.4, 1, 0.5, 3));
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; b <= 4; ++b) {
      for (std::size_t n = 0; n < 3; ++n) {
        for (std::size_t m = 0; m < 3; ++m) {
          CHECK(should_propose(2, a / 4.0, n, b / 4.0, m) == line12(2, a / 4.0, n, b / 4.0, m));
        }
      }
    }
  }
}

TEST_CASE("online learning trace invariants") {
  for (const std::string domain : {"cover", "blocks"}) {
    CAPTURE(domain);
    const auto r = run_experiment(quick(domain, 1));
    REQUIRE_FALSE(r.online.trace.empty());
    double best_rho = -1;
    std::size_t best_nu = std::numeric_limits<std::size_t>::max();
    for (const auto& t : r.online.trace) {
      const bool nondecreasing = t.rho_best > best_rho || (t.rho_best == best_rho && t.nu_best <= best_nu);
      CHECK(nondecreasing);
      best_rho = t.rho_best;
      best_nu = t.nu_best;
      CHECK(t.proposed == (t.nu != 0 && line12(t.i, t.rho, t.nu, t.prev_rho, t.prev_nu)));
      CHECK(t.invalid_plans == 0);
      CHECK(t.duplicate_plans == 0);
    }
    CHECK(r.online.trace.back().nu == 0);
  }
}

TEST_CASE("metrics are byte-identical for equal seeds") {
  const auto a = metrics_json(run_experiment(quick("cover", 3))).dump();
  const auto b = metrics_json(run_experiment(quick("cover", 3))).dump();
  CHECK(a == b);
  CHECK(a.find("seconds") == std::string::npos);
}

TEST_CASE("datasets survive JSON") {
  const auto r = run_experiment(quick("cover", 0));
  const auto d = make_domain("cover");
  const auto j = dataset_json(r.online.data);
  const auto back = dataset_from_json(j, d.spec);
  CHECK(back.num_positives() == r.online.data.num_positives());
  CHECK(back.num_negatives() == r.online.data.num_negatives());
  CHECK(dataset_json(back) == j);
  CHECK_THROWS_AS(dataset_from_json(nlohmann::json::parse(R"({"trajectories": [{"task": 0}]})"), d.spec), Error);
}

TEST_CASE("run configuration is validated") {
  RunConfig c;
  c.domain = "nope";
  CHECK_THROWS_AS(validate(c), UnknownDomain);
  c = RunConfig{};
  c.noise = 1.5;
  CHECK_THROWS_AS(validate(c), Error);
  c = RunConfig{};
  c.proposer = "external:";
  CHECK_THROWS_AS(validate(c), Error);
  c = RunConfig{};
  c.domain = "coffee";
  CHECK(planner_config(c, make_domain("coffee").spec).n_abstract == 100);
  CHECK(planner_config(c, make_domain("cover").spec).n_abstract == 8);
  c.n_abstract = 3;
  CHECK(planner_config(c, make_domain("coffee").spec).n_abstract == 3);
}

TEST_CASE("shipped models load by name") {
  const auto d = make_domain("cover");
  CHECK(load_model("oracle", d.spec).operators.size() == d.spec.oracle.operators.size());
  CHECK(load_model("initial", d.spec).operators.size() == d.spec.initial.operators.size());
  CHECK_THROWS_AS(load_model("learned:/nonexistent/model.txt", d.spec), Error);
  CHECK_THROWS_AS(load_model("weird", d.spec), Error);
}

TEST_CASE("initial HLAs with preconditions are kept as given") {
  const auto d = make_domain("balance");
  std::vector<HLA> given;
  for (const auto& h : d.spec.initial.operators) {
    if (!h.pre.empty()) given.push_back(h);
  }
  REQUIRE_FALSE(given.empty());
  std::vector<HLA> learned = given;
  for (auto& h : learned) {
    h.name += "L";
    h.pre.clear();
  }
  const auto merged = merge_initial_hlas(given, learned, d.spec.initial.predicates, d.spec.goal_predicates);
  CHECK(merged.size() == given.size());
  for (const auto& h : given) {
    CHECK(std::find(merged.begin(), merged.end(), h) != merged.end());
  }
}
