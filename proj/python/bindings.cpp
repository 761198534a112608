#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "reuseopt/cli.hpp"
#include "reuseopt/deploy.hpp"
#include "reuseopt/error.hpp"
#include "reuseopt/network_json.hpp"
#include "reuseopt/solvers.hpp"
#include "reuseopt/synthetic.hpp"

namespace py = pybind11;
using namespace reuseopt;

namespace {

using CostRow = std::tuple<std::uint64_t, double, double, double, double, double>;

py::dict cost_dict(const CostVector& c) {
  py::dict d;
  d["lut"] = c.lut;
  d["ff"] = c.ff;
  d["bram"] = c.bram;
  d["dsp"] = c.dsp;
  d["latency_cycles"] = c.latency_cycles;
  return d;
}

py::dict assignment_dict(const Assignment& a, const LatencyBudget& budget) {
  py::dict d;
  d["feasible"] = a.feasible;
  d["reuse_factors"] = a.reuse_factors;
  d["latency_cycles"] = a.latency_cycles;
  d["latency_us"] = budget.to_us(double(a.latency_cycles));
  d["scalar_cost"] = a.scalar_cost;
  d["totals"] = cost_dict(a.total);
  return d;
}

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::MissingModel: return "missing_model";
    case ErrorCode::CorruptModel: return "corrupt_model";
    case ErrorCode::VersionMismatch: return "version_mismatch";
    case ErrorCode::Io: return "io";
    case ErrorCode::Evaluation: return "evaluation";
  }
  return "unknown";
}

Weights to_weights(const std::array<double, 4>& w) { return Weights{w[0], w[1], w[2], w[3]}; }

Assignment solve(const CandidateTable& table, const LatencyBudget& budget, const Weights& weights,
                 const std::string& solver, std::uint64_t trials, std::uint64_t seed) {
  if (solver == "exact") return solve_exact(table, budget, weights);
  if (solver == "sa") {
    AnnealingOptions options;
    options.trials = trials;
    options.seed = seed;
    return solve_sa(table, budget, weights, options);
  }
  if (solver == "stochastic") return solve_stochastic(table, budget, weights, trials, seed);
  throw Error(ErrorCode::Parse, "unknown solver '" + solver + "' (expected exact, sa or stochastic)");
}

// Each row is (reuse_factor, lut, ff, bram, dsp, latency_cycles); latency is rounded up to whole cycles.
CandidateTable table_from_rows(const std::vector<std::vector<CostRow>>& rows) {
  CandidateTable table;
  for (const auto& layer : rows) {
    auto& out = table.layers.emplace_back();
    for (const auto& [rf, lut, ff, bram, dsp, latency] : layer) {
      if (latency < 0) throw Error(ErrorCode::Validation, "negative latency in candidate table");
      Candidate c;
      c.reuse_factor = rf;
      c.latency = static_cast<std::uint64_t>(std::ceil(latency));
      c.cost = CostVector{lut, ff, bram, dsp, double(c.latency)};
      out.push_back(c);
    }
  }
  validate(table);
  return table;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reuse-factor optimization for FPGA neural network deployment.";

  // Module-lifetime type; deliberately never released.
  static PyObject* error_type = PyErr_NewException("reuseopt._core.ReuseoptError", PyExc_RuntimeError, nullptr);
  m.attr("ReuseoptError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = code_name(e.code());
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def(
      "network_geometry",
      [](const std::string& network_json) {
        py::list out;
        for (const LayerGeometry& g : infer_geometry(parse_network(network_json))) {
          py::dict d;
          d["kind"] = std::string(to_string(g.kind));
          d["seq_len"] = g.seq_len;
          d["in_features"] = g.in_features;
          d["out_features"] = g.out_features;
          d["n_in"] = g.n_in;
          d["n_out"] = g.n_out;
          d["out_seq_len"] = g.out_seq_len;
          d["valid_reuse_factors"] = valid_reuse_factors(g);
          out.append(d);
        }
        return out;
      },
      py::arg("network_json"));
  m.def(
      "network_workload", [](const std::string& network_json) { return network_workload(parse_network(network_json)); },
      py::arg("network_json"));
  m.def(
      "valid_reuse_factors",
      [](std::uint64_t n_in, std::uint64_t n_out) {
        return valid_reuse_factors(layer_geometry(LayerKind::Dense, 1, n_in, n_out, std::nullopt));
      },
      py::arg("n_in"), py::arg("n_out"));
  m.def(
      "block_factor",
      [](std::uint64_t n_in, std::uint64_t n_out, std::uint64_t reuse_factor) {
        return block_factor(layer_geometry(LayerKind::Dense, 1, n_in, n_out, std::nullopt), reuse_factor);
      },
      py::arg("n_in"), py::arg("n_out"), py::arg("reuse_factor"));

  m.def(
      "gen_synthetic_csv",
      [](const std::string& sweep_json, double noise_pct, std::uint64_t seed) {
        const SweepSpec sweep = sweep_json.empty() ? SweepSpec{} : sweep_from_json(nlohmann::json::parse(sweep_json));
        std::ostringstream out;
        write_observation_csv(out, gen_synthetic(sweep, noise_pct, seed));
        return out.str();
      },
      py::arg("sweep_json") = "", py::arg("noise_pct") = 5.0, py::arg("seed") = 0);

  m.def(
      "solve_table",
      [](const std::vector<std::vector<CostRow>>& rows, std::uint64_t budget_cycles, double clock_mhz,
         std::array<double, 4> weights, const std::string& solver, std::uint64_t trials, std::uint64_t seed) {
        const CandidateTable table = table_from_rows(rows);
        const LatencyBudget budget{budget_cycles, clock_mhz};
        Assignment a;
        {
          py::gil_scoped_release release;
          a = solve(table, budget, to_weights(weights), solver, trials, seed);
        }
        return assignment_dict(a, budget);
      },
      py::arg("layers"), py::arg("budget_cycles") = 50000, py::arg("clock_mhz") = 250.0,
      py::arg("weights") = std::array<double, 4>{1, 1, 1, 1}, py::arg("solver") = "exact", py::arg("trials") = 1000,
      py::arg("seed") = 0);

  m.def(
      "optimize",
      [](const std::string& network_json, const std::string& models_dir, std::uint64_t budget_cycles,
         double clock_mhz, std::array<double, 4> weights, const std::string& solver, std::uint64_t trials,
         std::uint64_t seed) {
        const NetworkSpec net = parse_network(network_json);
        const LatencyBudget budget{budget_cycles, clock_mhz};
        Assignment a;
        {
          py::gil_scoped_release release;
          const CandidateTable table = models_dir.empty()
                                           ? build_candidates(net, AnalyticCostModel{})
                                           : build_candidates(net, ForestCostModel(ModelSet::load(models_dir)));
          a = solve(table, budget, to_weights(weights), solver, trials, seed);
        }
        return assignment_dict(a, budget);
      },
      py::arg("network_json"), py::arg("models_dir") = "", py::arg("budget_cycles") = 50000,
      py::arg("clock_mhz") = 250.0, py::arg("weights") = std::array<double, 4>{1, 1, 1, 1},
      py::arg("solver") = "exact", py::arg("trials") = 1000, py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
