#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "reuseopt/solvers.hpp"

namespace reuseopt {

struct ComparisonRow {
  std::string method;                    // "exact", "stochastic" or "sa"
  std::optional<std::uint64_t> trials;   // empty for the exact solver
  std::optional<std::uint64_t> seed;
  Assignment assignment;
  double latency_us = 0.0;
  double search_time_s = 0.0;
};

struct CompareOptions {
  LatencyBudget budget;
  Weights weights;
  std::vector<std::uint64_t> trial_ladder{1000, 10000, 100000, 1000000};
  std::vector<std::uint64_t> seeds{0};
  double initial_temperature = 100.0;
  double cooling = 0.01;
};

/// Runs the exact solver once and both baselines for every (trials, seed)
/// cell on the same candidate table, timing each run.
std::vector<ComparisonRow> compare_solvers(const CandidateTable& table, const CompareOptions& options);

/// method,trials,luts,dsps,latency_us,search_time_s,seed,ff,bram,latency_cycles,scalar_cost,feasible
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

}  // namespace reuseopt
