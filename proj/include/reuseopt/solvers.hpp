#pragma once

// Reuse-factor assignment as a multiple-choice knapsack: pick one candidate
// per layer, minimize weighted resource cost, keep the summed latency within
// the budget.

#include <cstdint>
#include <vector>

#include "reuseopt/deploy.hpp"

namespace reuseopt {

/// Indices of the candidates of one layer that are not dominated by another
/// candidate (<= latency and <= scalar cost, one strictly). Among exact
/// duplicates the smallest reuse factor is kept. Ascending latency.
std::vector<std::size_t> pareto_candidates(const std::vector<Candidate>& layer, const Weights& weights);

/// Provably optimal assignment. Among equal-cost optima the lexicographically
/// smallest reuse-factor vector wins. If nothing fits, returns the
/// minimum-latency assignment with feasible == false.
///
/// Works on suffix Pareto sets of (latency, cost) states, so memory grows with
/// the number of non-dominated partial solutions rather than with the budget.
Assignment solve_exact(const CandidateTable& table, const LatencyBudget& budget, const Weights& weights = {});

/// Best feasible assignment among `trials` uniform random draws. Falls back to
/// the lowest-latency draw (feasible == false) if no draw fit.
Assignment solve_stochastic(const CandidateTable& table, const LatencyBudget& budget, const Weights& weights,
                            std::uint64_t trials, std::uint64_t seed);

struct AnnealingOptions {
  std::uint64_t trials = 1000;  // iterations, counting the random start
  std::uint64_t seed = 0;
  double initial_temperature = 100.0;
  double cooling = 0.01;        // t <- t * (1 - cooling) after every iteration
};

/// exp((best - proposed) / t), 1 when proposed <= best, 0 once t has reached 0.
double sa_acceptance_probability(double best_cost, double proposed_cost, double temperature);

/// Starts from a random assignment and changes one layer per iteration.
/// A feasible proposal cheaper than the best so far is always taken; other
/// feasible proposals are taken with sa_acceptance_probability. Infeasible
/// proposals are rejected, except that before anything feasible has been seen
/// the walk accepts proposals that lower the total latency.
Assignment solve_sa(const CandidateTable& table, const LatencyBudget& budget, const Weights& weights,
                    const AnnealingOptions& options);

}  // namespace reuseopt
