#pragma once

// Per-layer deployment candidates and the assignments solvers choose from them.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "reuseopt/layer_algebra.hpp"
#include "reuseopt/model_io.hpp"

namespace reuseopt {

struct CostVector {
  double lut = 0.0;
  double ff = 0.0;
  double bram = 0.0;
  double dsp = 0.0;
  double latency_cycles = 0.0;

  CostVector& operator+=(const CostVector& o) {
    lut += o.lut;
    ff += o.ff;
    bram += o.bram;
    dsp += o.dsp;
    latency_cycles += o.latency_cycles;
    return *this;
  }
  friend CostVector operator+(CostVector a, const CostVector& b) { return a += b; }
  bool operator==(const CostVector&) const = default;
};

/// Weights of the scalar resource objective; latency is a constraint, not a cost.
struct Weights {
  double lut = 1.0;
  double ff = 1.0;
  double bram = 1.0;
  double dsp = 1.0;

  double scalar(const CostVector& c) const { return lut * c.lut + ff * c.ff + bram * c.bram + dsp * c.dsp; }
};

/// Parses "w_lut,w_ff,w_bram,w_dsp". Throws Error{Parse}.
Weights parse_weights(const std::string& text);

struct LatencyBudget {
  std::uint64_t cycles = 50000;
  double clock_mhz = 250.0;

  double to_us(double cycles_value) const { return cycles_value / clock_mhz; }
};

struct Candidate {
  std::uint64_t reuse_factor = 1;
  CostVector cost;                 // cost.latency_cycles == latency
  std::uint64_t latency = 0;       // predicted latency rounded up to whole cycles
};

struct CandidateTable {
  std::vector<std::vector<Candidate>> layers;  // per layer, ascending reuse factor

  std::size_t num_layers() const { return layers.size(); }
  /// Number of distinct assignments (saturates at UINT64_MAX).
  std::uint64_t combinations() const;
};

/// Throws Error{Validation} if any layer is empty or reuse factors are not
/// strictly ascending.
void validate(const CandidateTable& table);

/// Predicts the cost of one layer at one reuse factor.
class CostPredictor {
 public:
  virtual ~CostPredictor() = default;
  virtual CostVector predict(const LayerGeometry& geom, std::uint64_t reuse_factor) const = 0;
};

/// Evaluates trained forests, one per (kind, target).
class ForestCostModel final : public CostPredictor {
 public:
  explicit ForestCostModel(ModelSet models) : models_(std::move(models)) {}
  CostVector predict(const LayerGeometry& geom, std::uint64_t reuse_factor) const override;
  const ModelSet& models() const { return models_; }

 private:
  ModelSet models_;
};

/// Noise-free synthetic cost forms; handy as a known ground truth.
class AnalyticCostModel final : public CostPredictor {
 public:
  CostVector predict(const LayerGeometry& geom, std::uint64_t reuse_factor) const override;
};

/// Same cost for every layer and reuse factor.
class ConstantCostModel final : public CostPredictor {
 public:
  explicit ConstantCostModel(CostVector cost) : cost_(cost) {}
  CostVector predict(const LayerGeometry&, std::uint64_t) const override { return cost_; }

 private:
  CostVector cost_;
};

/// Every valid reuse factor of every layer with its predicted cost; latency
/// is rounded up to whole cycles.
CandidateTable build_candidates(const std::vector<LayerGeometry>& geoms, const CostPredictor& predictor);
CandidateTable build_candidates(const NetworkSpec& net, const CostPredictor& predictor);

struct Assignment {
  std::vector<std::size_t> choices;          // candidate index per layer
  std::vector<std::uint64_t> reuse_factors;  // one per layer
  CostVector total;
  std::uint64_t latency_cycles = 0;          // integer sum of candidate latencies
  bool feasible = false;
  double scalar_cost = 0.0;
};

/// Scalar cost of a full assignment, accumulated from the last layer to the
/// first. Every solver compares costs with exactly this expression.
double assignment_cost(const CandidateTable& table, const std::vector<std::size_t>& choices, const Weights& weights);

Assignment make_assignment(const CandidateTable& table, std::vector<std::size_t> choices,
                           const LatencyBudget& budget, const Weights& weights);

}  // namespace reuseopt
