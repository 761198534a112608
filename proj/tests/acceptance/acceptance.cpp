// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "reuseopt/cli.hpp"
#include "reuseopt/forest.hpp"
#include "reuseopt/io_util.hpp"
#include "reuseopt/metrics.hpp"
#include "reuseopt/model_io.hpp"
#include "reuseopt/nas.hpp"
#include "reuseopt/network_json.hpp"
#include "reuseopt/solvers.hpp"
#include "reuseopt/synthetic.hpp"
#include "support/instances.hpp"

using namespace reuseopt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Every assignment a solver reports as feasible is re-summed from the table.
std::size_t feasible_checked = 0;
std::size_t feasibility_violations = 0;

void audit(const CandidateTable& table, const Assignment& a, const LatencyBudget& budget) {
  if (!a.feasible) return;
  std::uint64_t latency = 0;
  for (std::size_t l = 0; l < table.num_layers(); ++l) latency += table.layers[l][a.choices[l]].latency;
  ++feasible_checked;
  if (latency > budget.cycles || latency != a.latency_cycles) ++feasibility_violations;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

NetworkSpec model1_network() {
  NetworkSpec net{256, 1, {}};
  for (std::uint32_t ch : {16, 16, 32, 32, 32}) net.layers.push_back(LayerSpec::conv1d(ch, 3, 2));
  for (std::uint32_t n : {64, 64, 32, 32, 16, 1}) net.layers.push_back(LayerSpec::dense(n));
  return net;
}

ModelSet synthetic_models(std::uint64_t seed) {
  const auto corpus = gen_synthetic(SweepSpec{}, 5.0, seed);
  ForestConfig config;
  config.seed = seed;
  ModelSet models;
  for (LayerKind k : kAllLayerKinds)
    for (Target t : kAllTargets) models.add(train_forest(corpus, k, t, config));
  return models;
}

Outcome workload_caps() {
  const auto conv = infer_geometry(NetworkSpec{512, 256, {LayerSpec::conv1d(256, 3, 1), LayerSpec::dense(1)}});
  const auto lstm = infer_geometry(NetworkSpec{512, 256, {LayerSpec::lstm(425), LayerSpec::dense(1)}});
  const auto dense = layer_geometry(LayerKind::Dense, 1, 217600, 512, std::nullopt);
  const std::uint64_t w_conv = workload(conv[0], LayerSpec::conv1d(256, 3, 1));
  const std::uint64_t w_lstm = workload(lstm[0], LayerSpec::lstm(425));
  const std::uint64_t w_dense = workload(dense, LayerSpec::dense(512));
  const bool ok = w_conv == 100'663'296ull && w_lstm == 223'544'900ull && w_dense == 111'411'200ull;
  return {ok, "conv " + std::to_string(w_conv) + ", lstm " + std::to_string(w_lstm) + ", dense " +
                  std::to_string(w_dense)};
}

Outcome block_factor_algebra() {
  std::mt19937_64 rng(2024);
  std::size_t bad = 0;
  for (int i = 0; i < 10'000; ++i) {
    const std::uint64_t n_in = 1 + rng() % 5000, n_out = 1 + rng() % 2000;
    const auto geom = layer_geometry(LayerKind::Dense, 1, n_in, n_out, std::nullopt);
    const auto rfs = valid_reuse_factors(geom);
    const std::uint64_t r = rfs[rng() % rfs.size()];
    bad += r * block_factor(geom, r) != n_in * n_out;
  }
  return {bad == 0, "10000 random triples, " + std::to_string(bad) + " mismatches"};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(77);
  std::size_t mismatches = 0, feasible = 0;
  for (int i = 0; i < 500; ++i) {
    const auto table = testing::random_table(rng, 1 + rng() % 6, 10);
    const LatencyBudget budget{200 + rng() % 1800};
    const Weights w{1, 1, 1, double(1 + rng() % 5)};
    const auto ref = testing::brute_force(table, budget, w);
    const auto got = solve_exact(table, budget, w);
    audit(table, got, budget);
    feasible += ref.feasible;
    if (got.feasible != ref.feasible || (ref.feasible && got.scalar_cost != ref.cost)) ++mismatches;
  }
  return {mismatches == 0,
          "500 instances (" + std::to_string(feasible) + " feasible), " + std::to_string(mismatches) + " mismatches"};
}

Outcome solver_ordering() {
  std::mt19937_64 rng(99);
  std::size_t violations = 0, comparisons = 0;
  for (int i = 0; i < 100; ++i) {
    const auto table = testing::random_table(rng, 2 + rng() % 9, 12);
    const LatencyBudget budget{300 + rng() % 3000};
    const auto exact = solve_exact(table, budget);
    audit(table, exact, budget);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto sto = solve_stochastic(table, budget, {}, 1000, seed);
      const auto sa = solve_sa(table, budget, {}, AnnealingOptions{1000, seed});
      audit(table, sto, budget);
      audit(table, sa, budget);
      for (const Assignment* h : {&sto, &sa}) {
        ++comparisons;
        if (h->feasible && (!exact.feasible || exact.scalar_cost > h->scalar_cost)) ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(comparisons) + " heuristic runs, " + std::to_string(violations) +
                               " cheaper than exact"};
}

Outcome speed(const ModelSet& models) {
  const auto table = build_candidates(model1_network(), ForestCostModel(models));
  const LatencyBudget budget;

  std::vector<double> exact_times;
  Assignment exact;
  for (int rep = 0; rep < 21; ++rep) {
    const auto t = Clock::now();
    exact = solve_exact(table, budget);
    exact_times.push_back(seconds_since(t));
  }
  std::nth_element(exact_times.begin(), exact_times.begin() + 10, exact_times.end());
  const double exact_s = exact_times[10];
  audit(table, exact, budget);

  const std::vector<double> ladder{1e3, 1e4, 1e5, 1e6};
  std::vector<double> times;
  for (double trials : ladder) {
    const auto t = Clock::now();
    const auto a = solve_stochastic(table, budget, {}, std::uint64_t(trials), 0);
    times.push_back(seconds_since(t));
    audit(table, a, budget);
    if (a.feasible && a.scalar_cost < exact.scalar_cost) return {false, "stochastic beat exact"};
  }
  // Least-squares line time = a + b * trials and its R².
  const double n = double(ladder.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    sx += ladder[i];
    sy += times[i];
    sxx += ladder[i] * ladder[i];
    sxy += ladder[i] * times[i];
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = (sy - b * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    ss_res += std::pow(times[i] - (a + b * ladder[i]), 2);
    ss_tot += std::pow(times[i] - sy / n, 2);
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  const double ratio = exact_s / times.back();
  return {ratio <= 0.01 && r2 >= 0.95,
          "exact " + fmt("%.3g", exact_s * 1e3) + " ms vs 1M stochastic " + fmt("%.3g", times.back() * 1e3) +
              " ms (ratio " + fmt("%.3g", ratio * 100) + "%), linear fit R2 " + fmt("%.4f", r2) + ", " +
              std::to_string(table.combinations()) + " combinations"};
}

Outcome model_quality() {
  const auto corpus = gen_synthetic(SweepSpec{}, 5.0, 0);
  const auto [train, test] = split_train_test(corpus, 0.8, 0);
  double worst = 1.0;
  std::string worst_name;
  for (LayerKind k : kAllLayerKinds)
    for (Target t : kAllTargets) {
      ForestConfig config;
      const double r2 = evaluate(train_forest(train, k, t, config), test).r2;
      if (r2 < worst) {
        worst = r2;
        worst_name = std::string(to_string(k)) + "/" + std::string(to_string(t));
      }
    }
  bool memorized = true;
  ForestConfig mem;
  mem.n_trees = 1;
  mem.bootstrap = false;
  for (LayerKind k : kAllLayerKinds)
    for (Target t : kAllTargets) memorized = memorized && evaluate(train_forest(train, k, t, mem), train).r2 == 1.0;
  return {worst >= 0.95 && memorized, std::to_string(corpus.size()) + " observations, worst held-out R2 " +
                                          fmt("%.4f", worst) + " (" + worst_name + "), memorization train R2 " +
                                          (memorized ? "1.0 for all 15" : "below 1.0")};
}

Outcome pareto_archive() {
  std::mt19937_64 rng(5);
  std::vector<Trial> trials(10'000);
  for (std::uint64_t i = 0; i < trials.size(); ++i) {
    trials[i].id = i;
    trials[i].obj1 = double(rng() % 2000) / 1000.0;
    trials[i].workload = rng() % 100'000;
  }
  // Reference: pairwise non-dominated set, smallest id among exact twins.
  std::vector<std::uint64_t> expected;
  for (const Trial& a : trials) {
    bool out = false;
    for (const Trial& b : trials)
      if (dominates(b, a) || (b.obj1 == a.obj1 && b.workload == a.workload && b.id < a.id)) {
        out = true;
        break;
      }
    if (!out) expected.push_back(a.id);
  }
  std::size_t mismatched_orders = 0, violations = 0;
  for (int shuffle = 0; shuffle <= 10; ++shuffle) {
    if (shuffle > 0) std::shuffle(trials.begin(), trials.end(), rng);
    ParetoArchive archive;
    for (const Trial& t : trials) archive.insert(t);
    std::vector<std::uint64_t> ids;
    for (const Trial& m : archive.members()) ids.push_back(m.id);
    std::sort(ids.begin(), ids.end());
    mismatched_orders += ids != expected;
    for (const Trial& m : archive.members())
      for (const Trial& t : trials) violations += dominates(t, m);
  }
  return {mismatched_orders == 0 && violations == 0,
          "front of " + std::to_string(expected.size()) + " from 10000 trials, " + std::to_string(mismatched_orders) +
              " of 11 orders differ, " + std::to_string(violations) + " dominance violations"};
}

Outcome end_to_end() {
  const fs::path dir = fs::temp_directory_path() / "reuseopt_acceptance_e2e";
  fs::remove_all(dir);
  const std::string d = dir.string();
  std::ostringstream out, err;
  auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--quiet", "--seed", "1", "--out-dir", d});
    return run_cli(args, out, err);
  };
  if (cli({"gen-data"}) != 0) return {false, "gen-data failed: " + err.str()};
  if (cli({"train", "--data", d + "/observations.csv"}) != 0) return {false, "train failed: " + err.str()};
  if (cli({"search", "--trials", "200", "--evaluator", "surrogate"}) != 0) return {false, "search failed: " + err.str()};

  std::ifstream jsonl(dir / "trials.jsonl");
  std::vector<Trial> trials;
  for (std::string line; std::getline(jsonl, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j["status"] != "ok") continue;
    Trial t;
    t.id = j["id"];
    t.obj1 = j["obj1"];
    t.workload = j["workload"];
    t.net = network_from_json(j["network"]);
    trials.push_back(t);
  }
  ParetoArchive archive;
  for (const Trial& t : trials) archive.insert(t);

  const ForestCostModel predictor(ModelSet::load(dir / "models"));
  std::size_t feasible = 0;
  for (const Trial& m : archive.members()) {
    const fs::path net_path = dir / ("front_" + std::to_string(m.id) + ".json");
    const fs::path out_path = dir / ("assignment_" + std::to_string(m.id) + ".json");
    write_file_atomic(net_path, network_to_json(m.net).dump());
    const int code = cli({"optimize", "--network", net_path.string(), "--models", d + "/models", "--output",
                          out_path.string()});
    const auto doc = nlohmann::json::parse(read_text_file(out_path));
    const auto table = build_candidates(m.net, predictor);
    Assignment a;
    for (std::size_t l = 0; l < table.num_layers(); ++l) {
      const std::uint64_t rf = doc["reuse_factors"][l];
      const auto& layer = table.layers[l];
      a.choices.push_back(std::find_if(layer.begin(), layer.end(), [&](const Candidate& c) {
                            return c.reuse_factor == rf;
                          }) - layer.begin());
    }
    a.feasible = doc["feasible"];
    a.latency_cycles = doc["totals"]["latency_cycles"].get<std::uint64_t>();
    audit(table, a, LatencyBudget{});
    feasible += code == 0 && a.feasible;
  }
  const std::size_t n = archive.size();
  fs::remove_all(dir);
  return {n > 0 && feasible == n, std::to_string(trials.size()) + " successful trials, " + std::to_string(feasible) +
                                      "/" + std::to_string(n) + " front members feasible"};
}

}  // namespace

int main() {
  std::printf("acceptance: building synthetic cost models\n");
  const ModelSet models = synthetic_models(0);

  report(1, "workload caps", workload_caps);
  report(2, "block-factor algebra", block_factor_algebra);
  report(3, "exact solver equals brute force", oracle_equivalence);
  report(4, "exact never worse than heuristics", solver_ordering);
  report(5, "solver speed and linear scaling", [&] { return speed(models); });
  report(7, "cost model quality", model_quality);
  report(8, "Pareto archive correctness", pareto_archive);
  report(9, "end-to-end pipeline", end_to_end);
  // Runs last so it covers every assignment produced above.
  report(6, "reported-feasible assignments fit the budget", [] {
    return Outcome{feasible_checked > 0 && feasibility_violations == 0,
                   std::to_string(feasible_checked) + " feasible assignments re-summed, " +
                       std::to_string(feasibility_violations) + " over budget"};
  });
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
