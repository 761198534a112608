#include "reuseopt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "reuseopt/error.hpp"
#include "reuseopt/random.hpp"

namespace reuseopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct State {
  std::uint64_t latency;
  double cost;
};

// Cheapest state whose latency fits in `budget`; states are sorted by latency
// with strictly decreasing cost, so that is the last one that fits.
double cheapest_within(const std::vector<State>& states, std::uint64_t budget) {
  auto it = std::upper_bound(states.begin(), states.end(), budget,
                             [](std::uint64_t b, const State& s) { return b < s.latency; });
  return it == states.begin() ? kInf : std::prev(it)->cost;
}

std::vector<std::size_t> min_latency_choices(const CandidateTable& table, const Weights& weights) {
  std::vector<std::size_t> choices;
  for (const auto& layer : table.layers) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < layer.size(); ++i) {
      const Candidate& c = layer[i];
      const Candidate& b = layer[best];
      if (c.latency < b.latency || (c.latency == b.latency && weights.scalar(c.cost) < weights.scalar(b.cost)))
        best = i;
    }
    choices.push_back(best);
  }
  return choices;
}

}  // namespace

std::vector<std::size_t> pareto_candidates(const std::vector<Candidate>& layer, const Weights& weights) {
  std::vector<std::size_t> order(layer.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> cost(layer.size());
  for (std::size_t i = 0; i < layer.size(); ++i) cost[i] = weights.scalar(layer[i].cost);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (layer[a].latency != layer[b].latency) return layer[a].latency < layer[b].latency;
    return cost[a] < cost[b];
  });
  std::vector<std::size_t> kept;
  for (std::size_t i : order)
    if (kept.empty() || cost[i] < cost[kept.back()]) kept.push_back(i);
  return kept;
}

Assignment solve_exact(const CandidateTable& table, const LatencyBudget& budget, const Weights& weights) {
  validate(table);
  const std::size_t n_layers = table.num_layers();

  // Lowest latency the layers before `l` can possibly use.
  std::vector<std::uint64_t> prefix_min_latency(n_layers + 1, 0);
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
    for (const Candidate& c : table.layers[l]) m = std::min(m, c.latency);
    prefix_min_latency[l + 1] = prefix_min_latency[l] + m;
  }
  if (prefix_min_latency[n_layers] > budget.cycles)
    return make_assignment(table, min_latency_choices(table, weights), budget, weights);

  // suffix[l]: non-dominated (latency, cost) over layers l..n-1, cost summed
  // back to front exactly as assignment_cost does.
  std::vector<std::vector<State>> suffix(n_layers + 1);
  suffix[n_layers] = {{0, 0.0}};
  // Each candidate shifts the next suffix front; a k-way merge by latency
  // with a running cost minimum keeps only the non-dominated states.
  struct Head {
    State state;
    std::size_t list;
    std::size_t pos;
  };
  auto later = [](const Head& a, const Head& b) {
    return a.state.latency != b.state.latency ? a.state.latency > b.state.latency : a.state.cost > b.state.cost;
  };
  std::vector<Head> heap;
  std::vector<std::pair<std::uint64_t, double>> shifts;
  for (std::size_t l = n_layers; l-- > 0;) {
    const std::uint64_t cap = budget.cycles - prefix_min_latency[l];
    const auto& layer = table.layers[l];
    const auto& next = suffix[l + 1];
    shifts.clear();
    heap.clear();
    for (std::size_t i : pareto_candidates(layer, weights)) {
      const Candidate& c = layer[i];
      if (c.latency + next.front().latency > cap) continue;
      shifts.emplace_back(c.latency, weights.scalar(c.cost));
      heap.push_back({{c.latency + next.front().latency, shifts.back().second + next.front().cost}, shifts.size() - 1, 0});
    }
    std::make_heap(heap.begin(), heap.end(), later);
    auto& out = suffix[l];
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), later);
      Head& h = heap.back();
      if (out.empty() || h.state.cost < out.back().cost) out.push_back(h.state);
      const auto& [lat, cost] = shifts[h.list];
      // Later entries of this list have higher latency, so any not cheaper
      // than the current front tail are dominated and can be skipped.
      const double bound = out.back().cost;
      h.pos = std::partition_point(next.begin() + h.pos + 1, next.end(),
                                   [&, c = cost](const State& s) { return c + s.cost >= bound; }) -
              next.begin();
      if (h.pos < next.size() && lat + next[h.pos].latency <= cap) {
        h.state = {lat + next[h.pos].latency, cost + next[h.pos].cost};
        std::push_heap(heap.begin(), heap.end(), later);
      } else {
        heap.pop_back();
      }
    }
  }

  // Walk forward taking the smallest reuse factor that still reaches the optimum.
  std::vector<std::size_t> choices;
  std::uint64_t remaining = budget.cycles;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const double target = cheapest_within(suffix[l], remaining);
    const auto& layer = table.layers[l];
    bool found = false;
    for (std::size_t i = 0; i < layer.size() && !found; ++i) {
      const Candidate& c = layer[i];
      if (c.latency > remaining) continue;
      if (weights.scalar(c.cost) + cheapest_within(suffix[l + 1], remaining - c.latency) == target) {
        choices.push_back(i);
        remaining -= c.latency;
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::Validation, "exact solver failed to reconstruct layer " + std::to_string(l));
  }
  return make_assignment(table, std::move(choices), budget, weights);
}

Assignment solve_stochastic(const CandidateTable& table, const LatencyBudget& budget, const Weights& weights,
                            std::uint64_t trials, std::uint64_t seed) {
  validate(table);
  if (trials == 0) throw Error(ErrorCode::Validation, "stochastic search needs at least one trial");
  const std::size_t n_layers = table.num_layers();

  std::vector<std::vector<double>> cost(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l)
    for (const Candidate& c : table.layers[l]) cost[l].push_back(weights.scalar(c.cost));

  Rng rng(seed);
  std::vector<std::size_t> draw(n_layers), best, fallback;
  double best_cost = kInf;
  std::uint64_t fallback_latency = std::numeric_limits<std::uint64_t>::max();

  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint64_t latency = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      draw[l] = uniform_index(rng, table.layers[l].size());
      latency += table.layers[l][draw[l]].latency;
    }
    if (latency <= budget.cycles) {
      double c = 0.0;
      for (std::size_t l = n_layers; l-- > 0;) c = cost[l][draw[l]] + c;
      if (c < best_cost) {
        best_cost = c;
        best = draw;
      }
    } else if (best.empty() && latency < fallback_latency) {
      fallback_latency = latency;
      fallback = draw;
    }
  }
  return make_assignment(table, best.empty() ? fallback : best, budget, weights);
}

double sa_acceptance_probability(double best_cost, double proposed_cost, double temperature) {
  if (proposed_cost <= best_cost) return 1.0;
  if (!(temperature > 0.0)) return 0.0;
  return std::exp((best_cost - proposed_cost) / temperature);
}

Assignment solve_sa(const CandidateTable& table, const LatencyBudget& budget, const Weights& weights,
                    const AnnealingOptions& options) {
  validate(table);
  if (options.trials == 0) throw Error(ErrorCode::Validation, "annealing needs at least one iteration");
  if (!(options.cooling >= 0.0 && options.cooling < 1.0))
    throw Error(ErrorCode::Validation, "cooling rate must be in [0, 1)");
  const std::size_t n_layers = table.num_layers();

  std::vector<std::vector<double>> cost(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l)
    for (const Candidate& c : table.layers[l]) cost[l].push_back(weights.scalar(c.cost));
  auto total_cost = [&](const std::vector<std::size_t>& x) {
    double c = 0.0;
    for (std::size_t l = n_layers; l-- > 0;) c = cost[l][x[l]] + c;
    return c;
  };

  Rng rng(options.seed);
  std::vector<std::size_t> current(n_layers);
  std::uint64_t current_latency = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    current[l] = uniform_index(rng, table.layers[l].size());
    current_latency += table.layers[l][current[l]].latency;
  }

  std::vector<std::size_t> best;
  double best_cost = kInf;
  if (current_latency <= budget.cycles) {
    best = current;
    best_cost = total_cost(current);
  }

  double temperature = options.initial_temperature;
  std::vector<std::size_t> proposal;
  for (std::uint64_t it = 1; it < options.trials; ++it) {
    proposal = current;
    const std::size_t l = uniform_index(rng, n_layers);
    const std::size_t n = table.layers[l].size();
    if (n > 1) {
      // Uniform over the other candidates of this layer.
      std::size_t pick = uniform_index(rng, n - 1);
      proposal[l] = pick >= current[l] ? pick + 1 : pick;
    }
    const std::uint64_t latency =
        current_latency - table.layers[l][current[l]].latency + table.layers[l][proposal[l]].latency;

    if (latency <= budget.cycles) {
      const double c = total_cost(proposal);
      bool accept;
      if (c < best_cost) {
        best = proposal;
        best_cost = c;
        accept = true;
      } else {
        accept = uniform_unit(rng) < sa_acceptance_probability(best_cost, c, temperature);
      }
      if (accept) {
        current.swap(proposal);
        current_latency = latency;
      }
    } else if (best.empty() && latency < current_latency) {
      current.swap(proposal);
      current_latency = latency;
    }
    temperature *= 1.0 - options.cooling;
  }
  return make_assignment(table, best.empty() ? current : best, budget, weights);
}

}  // namespace reuseopt
