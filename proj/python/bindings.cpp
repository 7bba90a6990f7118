#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nsp/experiment.hpp"
#include "nsp/pddl.hpp"

namespace py = pybind11;
using namespace nsp;

namespace {

RunConfig make_config(const std::string& domain, std::uint64_t seed, const py::dict& opts) {
  RunConfig c;
  c.domain = domain;
  c.seed = seed;
  for (const auto& [k, v] : opts) {
    const auto key = py::cast<std::string>(k);
    if (key == "max_iters") c.max_iters = py::cast<int>(v);
    else if (key == "budget") c.n_abstract = py::cast<int>(v);
    else if (key == "node_budget") c.node_budget = py::cast<std::size_t>(v);
    else if (key == "alpha") c.alpha = py::cast<double>(v);
    else if (key == "alpha_sel") c.alpha_sel = py::cast<double>(v);
    else if (key == "k_switch") c.k_switch = py::cast<std::size_t>(v);
    else if (key == "noise") c.noise = py::cast<double>(v);
    else if (key == "proposer") c.proposer = py::cast<std::string>(v);
    else if (key == "eval_tasks") c.eval_tasks = py::cast<std::size_t>(v);
    else if (key == "parallel_tasks") c.workers = py::cast<std::size_t>(v);
    else throw Error("unknown option '" + key + "'");
  }
  validate(c);
  return c;
}

Model named_model(const std::string& domain, const std::string& which) {
  return load_model(which, make_domain(domain).spec);
}

}  // namespace

PYBIND11_MODULE(_nsp, m) {
  m.doc() = "Symbolic world-model learning with predicate invention";
  py::register_exception<Error>(m, "NspError", PyExc_RuntimeError);

  m.def("domains", &domain_names);

  m.def(
      "run",
      [](const std::string& domain, std::uint64_t seed, const py::dict& opts) {
        const auto cfg = make_config(domain, seed, opts);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        return py::make_tuple(metrics_json(r).dump(), print_model(r.online.best));
      },
      py::arg("domain"), py::arg("seed") = 0, py::arg("opts") = py::dict());

  m.def(
      "evaluate",
      [](const std::string& domain, const std::string& model, std::uint64_t seed, const py::dict& opts) {
        const auto cfg = make_config(domain, seed, opts);
        const auto d = make_domain(domain);
        const auto loaded = load_model(model, d.spec);
        EvalReport report;
        {
          py::gil_scoped_release release;
          report = evaluate_model(cfg, loaded);
        }
        return eval_json(report, planner_config(cfg, d.spec).n_abstract).dump();
      },
      py::arg("domain"), py::arg("model") = "oracle", py::arg("seed") = 0, py::arg("opts") = py::dict());

  m.def(
      "model_text", [](const std::string& domain, const std::string& which) { return print_model(named_model(domain, which)); },
      py::arg("domain"), py::arg("which") = "oracle");

  m.def(
      "parse_model",
      [](const std::string& domain, const std::string& text) {
        return print_model(parse_model(text, make_domain(domain).spec.types));
      },
      py::arg("domain"), py::arg("text"));

  m.def(
      "export_pddl",
      [](const std::string& domain, const std::string& which, std::uint64_t seed) {
        const auto d = make_domain(domain);
        const auto model = load_model(which, d.spec);
        const auto task = d.tasks->test(1, seed).front();
        const Perceiver perceiver(d.spec.registry, {0.0, seed});
        const auto init = abstract_state(task.init, model.predicates, d.spec.types, perceiver, {});
        const auto ex = export_planning_model(model, d.spec.types, task, init, domain);
        return py::make_tuple(ex.domain, ex.problem);
      },
      py::arg("domain"), py::arg("which") = "oracle", py::arg("seed") = 0);
}
