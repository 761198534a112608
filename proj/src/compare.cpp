#include "reuseopt/compare.hpp"

#include <chrono>

#include "reuseopt/io_util.hpp"

namespace reuseopt {

namespace {

template <typename Fn>
ComparisonRow timed(std::string method, std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed,
                    const LatencyBudget& budget, Fn&& solve) {
  const auto start = std::chrono::steady_clock::now();
  Assignment a = solve();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  ComparisonRow row{std::move(method), trials, seed, std::move(a), 0.0, elapsed.count()};
  row.latency_us = budget.to_us(double(row.assignment.latency_cycles));
  return row;
}

}  // namespace

std::vector<ComparisonRow> compare_solvers(const CandidateTable& table, const CompareOptions& options) {
  std::vector<ComparisonRow> rows;
  rows.push_back(timed("exact", std::nullopt, std::nullopt, options.budget,
                       [&] { return solve_exact(table, options.budget, options.weights); }));
  for (std::uint64_t trials : options.trial_ladder)
    for (std::uint64_t seed : options.seeds)
      rows.push_back(timed("stochastic", trials, seed, options.budget,
                           [&] { return solve_stochastic(table, options.budget, options.weights, trials, seed); }));
  for (std::uint64_t trials : options.trial_ladder)
    for (std::uint64_t seed : options.seeds) {
      const AnnealingOptions sa{trials, seed, options.initial_temperature, options.cooling};
      rows.push_back(timed("sa", trials, seed, options.budget,
                           [&] { return solve_sa(table, options.budget, options.weights, sa); }));
    }
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "method,trials,luts,dsps,latency_us,search_time_s,seed,ff,bram,latency_cycles,scalar_cost,feasible\n";
  for (const ComparisonRow& r : rows) {
    const Assignment& a = r.assignment;
    out << r.method << ',' << (r.trials ? std::to_string(*r.trials) : "") << ',' << format_sig4(a.total.lut) << ','
        << format_sig4(a.total.dsp) << ',' << format_sig4(r.latency_us) << ',' << format_sig4(r.search_time_s) << ','
        << (r.seed ? std::to_string(*r.seed) : "") << ',' << format_sig4(a.total.ff) << ','
        << format_sig4(a.total.bram) << ',' << a.latency_cycles << ',' << format_sig4(a.scalar_cost) << ','
        << (a.feasible ? "true" : "false") << '\n';
  }
}

}  // namespace reuseopt
