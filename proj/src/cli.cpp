#include "reuseopt/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "reuseopt/compare.hpp"
#include "reuseopt/error.hpp"
#include "reuseopt/io_util.hpp"
#include "reuseopt/metrics.hpp"
#include "reuseopt/nas.hpp"
#include "reuseopt/network_json.hpp"
#include "reuseopt/solvers.hpp"
#include "reuseopt/synthetic.hpp"

namespace reuseopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool quiet = false;
};

struct GenDataOptions {
  std::string sweep;
  double noise_pct = 5.0;
  std::string output;
};

struct TrainOptions {
  std::string data;
  std::string models;
  std::uint32_t trees = 100;
  std::uint32_t min_leaf = 1;
  std::uint32_t max_depth = 0;
  std::uint32_t feature_subsample = 0;
  double split = 0.8;
  std::uint32_t threads = 0;
};

struct DeployOptions {
  std::string network;
  std::string models;
  std::uint64_t budget_cycles = 50000;
  double clock_mhz = 250.0;
  std::string weights = "1,1,1,1";
};

struct OptimizeOptions {
  std::string solver = "exact";
  std::uint64_t trials = 100000;
  std::string output;
};

struct SearchOptions {
  std::string space;
  std::uint64_t trials = 1000;
  std::string evaluator = "surrogate";
  unsigned threads = 1;
};

struct CompareCliOptions {
  std::string trials = "1000,10000,100000,1000000";
  std::string seeds = "0";
};

class Run {
 public:
  Run(std::string command, const GlobalOptions& global, std::ostream& out)
      : command_(std::move(command)), global_(global), out_(out), started_(std::chrono::system_clock::now()) {}

  fs::path out_dir() const { return global_.out_dir; }
  json& config() { return config_; }

  void write(const fs::path& path, const std::string& contents) {
    write_file_atomic(path, contents);
    outputs_.push_back(path.string());
  }

  void note(const std::string& line) {
    if (!global_.quiet) out_ << line << '\n';
  }

  void finish(const json& extra = json::object()) {
    const auto end = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(started_);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    json manifest = {{"command", command_},
                     {"config", config_},
                     {"global", {{"seed", global_.seed}, {"out_dir", global_.out_dir}, {"quiet", global_.quiet}}},
                     {"outputs", outputs_},
                     {"started_at", stamp},
                     {"wall_time_s", std::chrono::duration<double>(end - started_).count()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    write_file_atomic(fs::path(global_.out_dir) / ("manifest-" + command_ + ".json"), manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  GlobalOptions global_;
  std::ostream& out_;
  std::chrono::system_clock::time_point started_;
  json config_ = json::object();
  std::vector<std::string> outputs_;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw Error(ErrorCode::Validation, std::string(what) + " path is required");
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::Io, std::string(what) + " not found: " + path);
}

void require_dir(const std::string& path, const char* what) {
  if (!fs::is_directory(path)) throw Error(ErrorCode::Io, std::string(what) + " directory not found: " + path);
}

json parse_json_file(const std::string& path, const char* what) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string(what) + ": " + e.what());
  }
}

std::vector<std::uint64_t> parse_uint_list(const std::string& text, const char* what) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, std::string(what) + ": '" + item + "' is not a non-negative integer");
    }
  }
  if (out.empty()) throw Error(ErrorCode::Parse, std::string(what) + ": empty list");
  return out;
}

json cost_json(const CostVector& c) {
  return {{"lut", c.lut}, {"ff", c.ff}, {"bram", c.bram}, {"dsp", c.dsp}, {"latency_cycles", c.latency_cycles}};
}

std::string metric_label(Target t) {
  switch (t) {
    case Target::Lut: return "LUT";
    case Target::Ff: return "FF";
    case Target::Bram: return "BRAM";
    case Target::Dsp: return "DSP";
    case Target::Latency: return "Latency";
  }
  return "?";
}

// ---- subcommands ----------------------------------------------------------

void cmd_gen_data(const GlobalOptions& g, const GenDataOptions& o, std::ostream& out) {
  Run run("gen-data", g, out);
  SweepSpec sweep;
  if (!o.sweep.empty()) {
    require_file(o.sweep, "sweep spec");
    sweep = sweep_from_json(parse_json_file(o.sweep, "sweep spec"));
  }
  const fs::path output = o.output.empty() ? run.out_dir() / "observations.csv" : fs::path(o.output);
  run.config() = {{"sweep", sweep_to_json(sweep)}, {"noise_pct", o.noise_pct}, {"output", output.string()}};

  const ObservationSet set = gen_synthetic(sweep, o.noise_pct, g.seed);
  std::ostringstream csv;
  write_observation_csv(csv, set);
  run.write(output, csv.str());
  run.note("wrote " + std::to_string(set.size()) + " observations to " + output.string());
  run.finish({{"observations", set.size()}});
}

void cmd_train(const GlobalOptions& g, const TrainOptions& o, std::ostream& out) {
  Run run("train", g, out);
  require_file(o.data, "observation CSV");
  const fs::path models_dir = o.models.empty() ? run.out_dir() / "models" : fs::path(o.models);
  ForestConfig config;
  config.n_trees = o.trees;
  config.min_leaf = o.min_leaf;
  config.max_depth = o.max_depth;
  config.feature_subsample = o.feature_subsample;
  config.seed = g.seed;
  config.threads = o.threads;
  run.config() = {{"data", o.data},   {"models", models_dir.string()}, {"trees", o.trees},
                  {"min_leaf", o.min_leaf}, {"max_depth", o.max_depth}, {"feature_subsample", o.feature_subsample},
                  {"split", o.split}, {"bootstrap", config.bootstrap}};

  std::ifstream in(o.data);
  IngestStats stats;
  const ObservationSet set = ingest(parse_observation_csv(in), o.data, &stats);
  run.note("ingested " + std::to_string(stats.rows) + " rows into " + std::to_string(stats.unique) +
           " unique observations");
  const auto [train, test] = split_train_test(set, o.split, g.seed);

  std::ostringstream metrics;
  metrics << "Layer,Metric,R2 Score,MAPE,RMSE %,Value Range,n_train,n_test,mape_excluded\n";
  std::size_t trained = 0;
  for (LayerKind kind : kAllLayerKinds) {
    const std::size_t n_train = train.of_kind(kind).size();
    const std::size_t n_test = test.of_kind(kind).size();
    if (n_train < 2) {
      if (n_train + n_test > 0) run.note("skipping " + std::string(to_string(kind)) + ": too few observations");
      continue;
    }
    for (Target target : kAllTargets) {
      const ForestModel model = train_forest(train, kind, target, config);
      save_model(model, models_dir / model_file_name(kind, target));
      ++trained;
      metrics << to_string(kind) << ',' << metric_label(target) << ',';
      try {
        const MetricsReport r = evaluate(model, test);
        metrics << format_sig4(r.r2) << ',' << format_sig4(r.mape_pct) << ',' << format_sig4(r.rmse_pct) << ','
                << format_sig4(r.range_min) << " - " << format_sig4(r.range_max) << ',' << n_train << ',' << n_test
                << ',' << r.mape_excluded << '\n';
      } catch (const Error& e) {
        // Empty holdout or zero target range: metrics undefined for this pair.
        metrics << ",,,," << n_train << ',' << n_test << ",\n";
      }
    }
  }
  if (trained == 0) throw Error(ErrorCode::Validation, "no layer kind has enough observations to train");
  run.write(run.out_dir() / "metrics.csv", metrics.str());
  run.note("trained " + std::to_string(trained) + " models into " + models_dir.string());
  run.finish({{"rows", stats.rows}, {"unique_observations", stats.unique}, {"models", trained}});
}

struct LoadedDeployment {
  NetworkSpec net;
  std::vector<LayerGeometry> geoms;
  ForestCostModel predictor;
  LatencyBudget budget;
  Weights weights;
};

LoadedDeployment load_deployment(const DeployOptions& o) {
  require_file(o.network, "network spec");
  require_dir(o.models, "model");
  if (o.budget_cycles == 0) throw Error(ErrorCode::Validation, "budget must be positive");
  if (!(o.clock_mhz > 0)) throw Error(ErrorCode::Validation, "clock must be positive");
  NetworkSpec net = load_network(o.network);
  auto geoms = infer_geometry(net);
  return {std::move(net), std::move(geoms), ForestCostModel(ModelSet::load(o.models)),
          LatencyBudget{o.budget_cycles, o.clock_mhz}, parse_weights(o.weights)};
}

json deploy_config(const DeployOptions& o) {
  return {{"network", o.network},
          {"models", o.models},
          {"budget_cycles", o.budget_cycles},
          {"clock_mhz", o.clock_mhz},
          {"weights", o.weights}};
}

int cmd_optimize(const GlobalOptions& g, const DeployOptions& d, const OptimizeOptions& o, std::ostream& out) {
  Run run("optimize", g, out);
  if (o.solver != "exact" && o.solver != "sa" && o.solver != "stochastic")
    throw Error(ErrorCode::Parse, "unknown solver '" + o.solver + "'");
  const fs::path output = o.output.empty() ? run.out_dir() / "assignment.json" : fs::path(o.output);
  run.config() = deploy_config(d);
  run.config()["solver"] = o.solver;
  run.config()["trials"] = o.trials;
  run.config()["output"] = output.string();

  const LoadedDeployment dep = load_deployment(d);
  const auto start = std::chrono::steady_clock::now();
  const CandidateTable table = build_candidates(dep.geoms, dep.predictor);
  Assignment a;
  if (o.solver == "exact") {
    a = solve_exact(table, dep.budget, dep.weights);
  } else if (o.solver == "stochastic") {
    a = solve_stochastic(table, dep.budget, dep.weights, o.trials, g.seed);
  } else {
    a = solve_sa(table, dep.budget, dep.weights, AnnealingOptions{o.trials, g.seed});
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json layers = json::array();
  for (std::size_t l = 0; l < dep.geoms.size(); ++l) {
    const Candidate& c = table.layers[l][a.choices[l]];
    layers.push_back({{"index", l},
                      {"kind", to_string(dep.geoms[l].kind)},
                      {"n_in", dep.geoms[l].n_in},
                      {"n_out", dep.geoms[l].n_out},
                      {"seq_len", dep.geoms[l].seq_len},
                      {"reuse_factor", c.reuse_factor},
                      {"block_factor", block_factor(dep.geoms[l], c.reuse_factor)},
                      {"cost", cost_json(c.cost)}});
  }
  json totals = cost_json(a.total);
  totals["latency_us"] = dep.budget.to_us(double(a.latency_cycles));
  const json doc = {{"solver", o.solver},
                    {"network", network_to_json(dep.net)},
                    {"budget", {{"cycles", dep.budget.cycles}, {"clock_mhz", dep.budget.clock_mhz}}},
                    {"weights", {dep.weights.lut, dep.weights.ff, dep.weights.bram, dep.weights.dsp}},
                    {"reuse_factors", a.reuse_factors},
                    {"layers", layers},
                    {"totals", totals},
                    {"scalar_cost", a.scalar_cost},
                    {"feasible", a.feasible}};
  run.write(output, doc.dump(2) + "\n");
  run.note(std::string(a.feasible ? "feasible" : "INFEASIBLE") + " assignment, latency " +
           std::to_string(a.latency_cycles) + " cycles, cost " + format_sig4(a.scalar_cost));
  run.finish({{"solve_wall_time_s", wall}, {"candidates", table.combinations()}});
  if (!a.feasible) {
    throw Error(ErrorCode::Infeasible, "no assignment meets " + std::to_string(dep.budget.cycles) +
                                           " cycles; minimum achievable latency is " +
                                           std::to_string(a.latency_cycles) + " cycles");
  }
  return kExitOk;
}

void cmd_search(const GlobalOptions& g, const SearchOptions& o, const DeployOptions& d, bool deploy,
                std::ostream& out) {
  Run run("search", g, out);
  SearchSpace space;
  if (!o.space.empty()) {
    require_file(o.space, "search space");
    space = space_from_json(parse_json_file(o.space, "search space"));
  }
  validate(space);
  run.config() = {{"space", space_to_json(space)}, {"trials", o.trials}, {"evaluator", o.evaluator}};
  if (deploy) run.config()["deploy"] = deploy_config(d);

  std::unique_ptr<Evaluator> evaluator;
  if (o.evaluator == "surrogate") {
    evaluator = std::make_unique<SurrogateEvaluator>();
  } else if (o.evaluator.rfind("cmd:", 0) == 0 && o.evaluator.size() > 4) {
    evaluator = std::make_unique<CommandEvaluator>(o.evaluator.substr(4));
  } else {
    throw Error(ErrorCode::Parse, "evaluator must be 'surrogate' or 'cmd:<command>'");
  }
  std::optional<ForestCostModel> predictor;
  if (deploy) {
    require_dir(d.models, "model");
    predictor.emplace(ModelSet::load(d.models));
  }

  SearchResult result = run_search(space, *evaluator, o.trials, g.seed, o.threads);
  std::vector<FrontRow> front = export_front(result.archive);
  if (predictor) deploy_front(front, *predictor, LatencyBudget{d.budget_cycles, d.clock_mhz}, parse_weights(d.weights));

  std::ostringstream csv, jsonl;
  write_front_csv(csv, front);
  write_trials_jsonl(jsonl, result.trials);
  run.write(run.out_dir() / "front.csv", csv.str());
  run.write(run.out_dir() / "trials.jsonl", jsonl.str());
  const auto failed = std::count_if(result.trials.begin(), result.trials.end(),
                                    [](const Trial& t) { return t.status == TrialStatus::Failed; });
  run.note(std::to_string(result.trials.size()) + " trials (" + std::to_string(failed) + " failed), " +
           std::to_string(front.size()) + " on the Pareto front");
  run.finish({{"front_size", front.size()}, {"failed_trials", failed}});
}

void cmd_compare(const GlobalOptions& g, const DeployOptions& d, const CompareCliOptions& o, std::ostream& out) {
  Run run("compare", g, out);
  run.config() = deploy_config(d);
  run.config()["trials"] = o.trials;
  run.config()["seeds"] = o.seeds;
  const LoadedDeployment dep = load_deployment(d);
  CompareOptions options;
  options.budget = dep.budget;
  options.weights = dep.weights;
  options.trial_ladder = parse_uint_list(o.trials, "--trials");
  options.seeds = parse_uint_list(o.seeds, "--seeds");
  if (std::find(options.trial_ladder.begin(), options.trial_ladder.end(), 0u) != options.trial_ladder.end())
    throw Error(ErrorCode::Parse, "--trials entries must be positive");

  const CandidateTable table = build_candidates(dep.geoms, dep.predictor);
  const auto rows = compare_solvers(table, options);
  std::ostringstream csv;
  write_comparison_csv(csv, rows);
  run.write(run.out_dir() / "comparison.csv", csv.str());
  run.note("compared " + std::to_string(rows.size()) + " solver runs; exact cost " +
           format_sig4(rows.front().assignment.scalar_cost));
  run.finish({{"combinations", table.combinations()}});
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return kExitParse;
    case ErrorCode::Infeasible: return kExitInfeasible;
    case ErrorCode::MissingModel: return kExitMissingModel;
    case ErrorCode::CorruptModel:
    case ErrorCode::VersionMismatch: return kExitBadModel;
    default: return kExitFailure;
  }
}

void add_deploy_options(CLI::App* cmd, DeployOptions& d, bool models_required) {
  auto* models = cmd->add_option("--models", d.models, "Directory of trained .forest models");
  if (models_required) models->required();
  cmd->add_option("--budget-cycles", d.budget_cycles, "Latency budget in cycles")->capture_default_str();
  cmd->add_option("--clock-mhz", d.clock_mhz, "Clock used to report microseconds")->capture_default_str();
  cmd->add_option("--weights", d.weights, "Objective weights lut,ff,bram,dsp")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reuse-factor optimizer for dataflow neural-network accelerators"};
  app.name("reuseopt");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
  app.add_option("--out-dir", global.out_dir, "Directory for outputs and manifests")->capture_default_str();
  app.add_flag("--quiet", global.quiet, "Suppress progress messages");

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic observation CSV");
  gen_cmd->add_option("--sweep", gen.sweep, "Sweep spec JSON (default: built-in grid)");
  gen_cmd->add_option("--noise", gen.noise_pct, "Multiplicative noise in percent")->capture_default_str();
  gen_cmd->add_option("--output", gen.output, "Output CSV (default: <out-dir>/observations.csv)");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train cost and latency forests from observations");
  train_cmd->add_option("--data", train.data, "Observation CSV")->required();
  train_cmd->add_option("--models", train.models, "Model output directory (default: <out-dir>/models)");
  train_cmd->add_option("--trees", train.trees, "Trees per forest")->capture_default_str();
  train_cmd->add_option("--min-leaf", train.min_leaf, "Minimum samples per leaf")->capture_default_str();
  train_cmd->add_option("--max-depth", train.max_depth, "Maximum depth, 0 = unlimited")->capture_default_str();
  train_cmd->add_option("--features", train.feature_subsample, "Features tried per split, 0 = all")
      ->capture_default_str();
  train_cmd->add_option("--split", train.split, "Training fraction")->capture_default_str();
  train_cmd->add_option("--threads", train.threads, "Training threads, 0 = all cores")->capture_default_str();

  DeployOptions deploy;
  OptimizeOptions optimize;
  auto* opt_cmd = app.add_subcommand("optimize", "Assign reuse factors under a latency budget");
  opt_cmd->add_option("--network", deploy.network, "Network spec JSON")->required();
  add_deploy_options(opt_cmd, deploy, true);
  opt_cmd->add_option("--solver", optimize.solver, "exact | sa | stochastic")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "sa", "stochastic"}));
  opt_cmd->add_option("--trials", optimize.trials, "Trials for sa/stochastic")->capture_default_str();
  opt_cmd->add_option("--output", optimize.output, "Output JSON (default: <out-dir>/assignment.json)");

  SearchOptions search;
  DeployOptions search_deploy;
  auto* search_cmd = app.add_subcommand("search", "Pareto search over network hyperparameters");
  search_cmd->add_option("--space", search.space, "Search space JSON (default: built-in space)");
  search_cmd->add_option("--trials", search.trials, "Number of trials")->capture_default_str();
  search_cmd->add_option("--evaluator", search.evaluator, "surrogate | cmd:<command>")->capture_default_str();
  search_cmd->add_option("--threads", search.threads, "Parallel evaluations")->capture_default_str();
  add_deploy_options(search_cmd, search_deploy, false);

  DeployOptions cmp_deploy;
  CompareCliOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare exact, stochastic and annealing solvers");
  cmp_cmd->add_option("--network", cmp_deploy.network, "Network spec JSON")->required();
  add_deploy_options(cmp_cmd, cmp_deploy, true);
  cmp_cmd->add_option("--trials", cmp.trials, "Comma-separated trial ladder")->capture_default_str();
  cmp_cmd->add_option("--seeds", cmp.seeds, "Comma-separated seeds")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "reuseopt: error: " << e.what() << '\n';
    return kExitParse;
  }

  try {
    fs::create_directories(global.out_dir);
    if (*gen_cmd) {
      cmd_gen_data(global, gen, out);
    } else if (*train_cmd) {
      cmd_train(global, train, out);
    } else if (*opt_cmd) {
      return cmd_optimize(global, deploy, optimize, out);
    } else if (*search_cmd) {
      cmd_search(global, search, search_deploy, !search_deploy.models.empty(), out);
    } else if (*cmp_cmd) {
      cmd_compare(global, cmp_deploy, cmp, out);
    }
  } catch (const Error& e) {
    err << "reuseopt: error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "reuseopt: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace reuseopt
