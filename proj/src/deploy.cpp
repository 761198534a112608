#include "reuseopt/deploy.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "reuseopt/error.hpp"
#include "reuseopt/observations.hpp"
#include "reuseopt/synthetic.hpp"

namespace reuseopt {

Weights parse_weights(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string field = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v) || v < 0)
      throw Error(ErrorCode::Parse, "weights: '" + field + "' is not a non-negative number");
    values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.size() != 4) throw Error(ErrorCode::Parse, "weights: expected 4 comma-separated values (lut,ff,bram,dsp)");
  return {values[0], values[1], values[2], values[3]};
}

std::uint64_t CandidateTable::combinations() const {
  std::uint64_t n = 1;
  for (const auto& layer : layers) {
    if (layer.empty()) return 0;
    if (n > std::numeric_limits<std::uint64_t>::max() / layer.size()) return std::numeric_limits<std::uint64_t>::max();
    n *= layer.size();
  }
  return n;
}

void validate(const CandidateTable& table) {
  if (table.layers.empty()) throw Error(ErrorCode::Validation, "candidate table has no layers");
  for (std::size_t l = 0; l < table.layers.size(); ++l) {
    const auto& layer = table.layers[l];
    if (layer.empty()) throw Error(ErrorCode::Validation, "layer " + std::to_string(l) + " has no candidates");
    for (std::size_t i = 1; i < layer.size(); ++i)
      if (layer[i].reuse_factor <= layer[i - 1].reuse_factor)
        throw Error(ErrorCode::Validation, "layer " + std::to_string(l) + ": reuse factors not ascending");
  }
}

CostVector ForestCostModel::predict(const LayerGeometry& geom, std::uint64_t reuse_factor) const {
  const FeatureVector f = layer_features(geom, reuse_factor);
  const std::span<const double> x(f);
  return {models_.get(geom.kind, Target::Lut).predict(x), models_.get(geom.kind, Target::Ff).predict(x),
          models_.get(geom.kind, Target::Bram).predict(x), models_.get(geom.kind, Target::Dsp).predict(x),
          models_.get(geom.kind, Target::Latency).predict(x)};
}

CostVector AnalyticCostModel::predict(const LayerGeometry& geom, std::uint64_t reuse_factor) const {
  const auto t = synthetic_targets(geom, reuse_factor);
  return {t[0], t[1], t[2], t[3], t[4]};
}

CandidateTable build_candidates(const std::vector<LayerGeometry>& geoms, const CostPredictor& predictor) {
  CandidateTable table;
  table.layers.reserve(geoms.size());
  for (const LayerGeometry& g : geoms) {
    std::vector<Candidate> layer;
    for (std::uint64_t rf : valid_reuse_factors(g)) {
      CostVector c = predictor.predict(g, rf);
      if (!(c.latency_cycles >= 0.0) || !std::isfinite(c.latency_cycles))
        throw Error(ErrorCode::Validation, "predicted latency is not a finite non-negative number");
      c.latency_cycles = std::ceil(c.latency_cycles);
      layer.push_back({rf, c, static_cast<std::uint64_t>(c.latency_cycles)});
    }
    table.layers.push_back(std::move(layer));
  }
  validate(table);
  return table;
}

CandidateTable build_candidates(const NetworkSpec& net, const CostPredictor& predictor) {
  return build_candidates(infer_geometry(net), predictor);
}

double assignment_cost(const CandidateTable& table, const std::vector<std::size_t>& choices, const Weights& weights) {
  double acc = 0.0;
  for (std::size_t l = choices.size(); l-- > 0;) acc = weights.scalar(table.layers[l][choices[l]].cost) + acc;
  return acc;
}

Assignment make_assignment(const CandidateTable& table, std::vector<std::size_t> choices, const LatencyBudget& budget,
                           const Weights& weights) {
  if (choices.size() != table.num_layers())
    throw Error(ErrorCode::Validation, "assignment has " + std::to_string(choices.size()) + " choices for " +
                                           std::to_string(table.num_layers()) + " layers");
  Assignment a;
  for (std::size_t l = 0; l < choices.size(); ++l) {
    if (choices[l] >= table.layers[l].size())
      throw Error(ErrorCode::Validation, "layer " + std::to_string(l) + ": candidate index out of range");
    const Candidate& c = table.layers[l][choices[l]];
    a.reuse_factors.push_back(c.reuse_factor);
    a.total += c.cost;
    a.latency_cycles += c.latency;
  }
  a.scalar_cost = assignment_cost(table, choices, weights);
  a.feasible = a.latency_cycles <= budget.cycles;
  a.choices = std::move(choices);
  return a;
}

}  // namespace reuseopt
