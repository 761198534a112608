#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "reuseopt/compare.hpp"
#include "reuseopt/error.hpp"
#include "reuseopt/solvers.hpp"
#include "support/instances.hpp"

using namespace reuseopt;
using reuseopt::testing::brute_force;
using reuseopt::testing::random_table;

namespace {

Candidate cand(std::uint64_t rf, double lut, std::uint64_t latency) {
  Candidate c;
  c.reuse_factor = rf;
  c.cost.lut = lut;
  c.cost.latency_cycles = double(latency);
  c.latency = latency;
  return c;
}

// Dominance by definition, checked against every other candidate.
std::vector<std::size_t> pareto_by_pairs(const std::vector<Candidate>& layer, const Weights& w) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < layer.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < layer.size() && !dominated; ++j) {
      if (i == j) continue;
      const double ci = w.scalar(layer[i].cost), cj = w.scalar(layer[j].cost);
      const bool no_worse = layer[j].latency <= layer[i].latency && cj <= ci;
      const bool better = layer[j].latency < layer[i].latency || cj < ci;
      const bool earlier_twin = layer[j].latency == layer[i].latency && cj == ci && j < i;
      dominated = (no_worse && better) || earlier_twin;
    }
    if (!dominated) kept.push_back(i);
  }
  return kept;
}

}  // namespace

TEST_CASE("exact solver matches brute force, including tie-breaks") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto table = random_table(rng, 1 + rng() % 5, 6);
    const LatencyBudget budget{100 + rng() % 1500};
    const Weights w{1, double(rng() % 3), 1, double(rng() % 4)};
    const auto ref = brute_force(table, budget, w);
    const auto got = solve_exact(table, budget, w);
    REQUIRE(got.feasible == ref.feasible);
    if (!ref.feasible) continue;
    REQUIRE(got.scalar_cost == ref.cost);
    REQUIRE(got.reuse_factors == ref.reuse_factors);
    REQUIRE(got.latency_cycles <= budget.cycles);
  }
}

TEST_CASE("pareto filter matches the pairwise definition") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto table = random_table(rng, 1, 25);
    auto& layer = table.layers[0];
    if (trial % 3 == 0 && layer.size() > 2) layer[1] = layer[0];  // exact twins
    auto got = pareto_candidates(layer, {});
    std::sort(got.begin(), got.end());
    REQUIRE(got == pareto_by_pairs(layer, {}));
  }
}

TEST_CASE("infeasible budgets yield the minimum-latency assignment") {
  CandidateTable t{{{cand(1, 10, 50), cand(2, 5, 80)}, {cand(1, 10, 40), cand(3, 1, 90)}}};
  const auto a = solve_exact(t, LatencyBudget{60});
  CHECK_FALSE(a.feasible);
  CHECK(a.latency_cycles == 90);
  CHECK(a.reuse_factors == std::vector<std::uint64_t>{1, 1});
}

TEST_CASE("budget boundary is inclusive") {
  CandidateTable t{{{cand(1, 10, 50), cand(2, 5, 80)}, {cand(1, 10, 40), cand(3, 1, 90)}}};
  // (rf1, rf3) costs 11 at exactly 140 cycles; one cycle less forces (rf2, rf1) at 15.
  const auto a = solve_exact(t, LatencyBudget{140});
  CHECK(a.feasible);
  CHECK(a.latency_cycles == 140);
  CHECK(a.scalar_cost == 11.0);
  CHECK(solve_exact(t, LatencyBudget{139}).scalar_cost == 15.0);
}

TEST_CASE("million-trial stochastic search finds the optimum of a tiny instance") {
  std::mt19937_64 rng(8);
  const auto table = random_table(rng, 3, 5);
  const LatencyBudget budget{700};
  const auto exact = solve_exact(table, budget);
  const auto sto = solve_stochastic(table, budget, {}, 1'000'000, 1);
  CHECK(sto.feasible);
  CHECK(sto.scalar_cost == exact.scalar_cost);
}

TEST_CASE("stochastic search is reproducible and never beats exact") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto table = random_table(rng, 2 + rng() % 6, 10);
    const LatencyBudget budget{300 + rng() % 2000};
    const auto exact = solve_exact(table, budget);
    const auto a = solve_stochastic(table, budget, {}, 2000, trial);
    CHECK(a.choices == solve_stochastic(table, budget, {}, 2000, trial).choices);
    if (a.feasible) CHECK(exact.scalar_cost <= a.scalar_cost);
    const auto s = solve_sa(table, budget, {}, AnnealingOptions{2000, std::uint64_t(trial)});
    if (s.feasible) CHECK(exact.scalar_cost <= s.scalar_cost);
  }
}

TEST_CASE("annealing solves a two-layer toy from almost every seed") {
  // Optimum: rf 4 on layer 0 and rf 2 on layer 1 (cost 7, latency 100).
  CandidateTable t{{{cand(1, 40, 10), cand(2, 20, 30), cand(4, 5, 60), cand(8, 1, 120)},
                    {cand(1, 30, 10), cand(2, 2, 40), cand(4, 1, 70)}}};
  const LatencyBudget budget{100};
  REQUIRE(solve_exact(t, budget).scalar_cost == 7.0);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    hits += solve_sa(t, budget, {}, AnnealingOptions{1000, seed}).scalar_cost == 7.0;
  CHECK(hits >= 99);
}

TEST_CASE("annealing acceptance probability") {
  CHECK(sa_acceptance_probability(10, 9, 100) == 1.0);
  CHECK(sa_acceptance_probability(10, 10, 0) == 1.0);
  CHECK(sa_acceptance_probability(10, 20, 0) == 0.0);
  CHECK(sa_acceptance_probability(10, 20, 100) == Catch::Approx(std::exp(-0.1)));
  CHECK(sa_acceptance_probability(10, 20, 10) == Catch::Approx(std::exp(-1.0)));
}

TEST_CASE("solver argument validation") {
  CandidateTable t{{{cand(1, 1, 1)}}};
  CHECK_THROWS_AS(solve_stochastic(t, {}, {}, 0, 0), Error);
  CHECK_THROWS_AS(solve_sa(t, {}, {}, AnnealingOptions{0}), Error);
  AnnealingOptions bad;
  bad.cooling = 1.0;
  CHECK_THROWS_AS(solve_sa(t, {}, {}, bad), Error);
  CHECK_THROWS_AS(solve_exact(CandidateTable{}, {}), Error);
  CHECK_THROWS_AS(solve_exact(CandidateTable{{{}}}, {}), Error);
}

TEST_CASE("weights parse and steer the objective") {
  const Weights w = parse_weights("1,0,0,10");
  CHECK(w.lut == 1.0);
  CHECK(w.dsp == 10.0);
  CHECK_THROWS_AS(parse_weights("1,2,3"), Error);
  CHECK_THROWS_AS(parse_weights("1,x,3,4"), Error);
  CHECK_THROWS_AS(parse_weights("1,-1,3,4"), Error);

  Candidate lut_heavy = cand(1, 100, 10);
  Candidate dsp_heavy = cand(2, 10, 10);
  dsp_heavy.cost.dsp = 20;
  CandidateTable t{{{lut_heavy, dsp_heavy}}};
  CHECK(solve_exact(t, LatencyBudget{10}, Weights{1, 1, 1, 1}).reuse_factors[0] == 2);
  CHECK(solve_exact(t, LatencyBudget{10}, Weights{1, 1, 1, 10}).reuse_factors[0] == 1);
}

TEST_CASE("comparison report covers every method, ladder rung and seed") {
  std::mt19937_64 rng(10);
  const auto table = random_table(rng, 4, 8);
  CompareOptions o;
  o.budget = LatencyBudget{900};
  o.trial_ladder = {100, 1000};
  o.seeds = {0, 1};
  const auto rows = compare_solvers(table, o);
  REQUIRE(rows.size() == 1 + 2 * 2 * 2);
  CHECK(rows[0].method == "exact");
  for (const auto& r : rows) {
    if (r.assignment.feasible) CHECK(rows[0].assignment.scalar_cost <= r.assignment.scalar_cost);
    CHECK(r.latency_us == Catch::Approx(double(r.assignment.latency_cycles) / 250.0));
  }
  std::ostringstream csv;
  write_comparison_csv(csv, rows);
  CHECK(csv.str().rfind("method,trials,luts,dsps,latency_us,search_time_s", 0) == 0);
}
