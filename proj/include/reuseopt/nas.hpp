#pragma once

// Bi-objective architecture search: minimize an accuracy objective supplied
// by a pluggable evaluator together with the network's multiply count.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reuseopt/deploy.hpp"
#include "reuseopt/layer_algebra.hpp"

namespace reuseopt {

struct IntRange {
  std::uint32_t min = 1;
  std::uint32_t max = 1;
  bool operator==(const IntRange&) const = default;
};

struct SearchSpace {
  std::vector<std::uint32_t> input_lengths{64, 128, 256, 512};
  std::uint32_t input_channels = 1;
  IntRange conv_blocks{0, 5};
  IntRange conv_channels{1, 256};
  std::vector<std::uint32_t> conv_kernels{3, 5, 7};
  std::vector<std::uint32_t> conv_pools{1, 2};
  IntRange lstm_layers{0, 3};
  IntRange lstm_units{1, 425};
  IntRange dense_layers{1, 5};
  IntRange dense_neurons{1, 512};
  /// When set, the last dense layer has exactly this many neurons (the regression head).
  std::optional<std::uint32_t> output_neurons = 1;

  bool operator==(const SearchSpace&) const = default;
};

/// Throws Error{Validation} when some sampled network could be invalid,
/// e.g. when the shortest input cannot survive the deepest pooling stack.
void validate(const SearchSpace& space);

nlohmann::json space_to_json(const SearchSpace& space);
/// Missing keys keep their defaults.
SearchSpace space_from_json(const nlohmann::json& doc);

/// Uniform draw, reproducible per (seed, trial_index).
NetworkSpec sample(const SearchSpace& space, std::uint64_t seed, std::uint64_t trial_index);

enum class TrialStatus { Ok, Failed };

struct Trial {
  std::uint64_t id = 0;
  NetworkSpec net;
  double obj1 = 0.0;
  std::uint64_t workload = 0;
  TrialStatus status = TrialStatus::Ok;
  std::string error;
};

/// Minimize-minimize dominance on (obj1, workload).
bool dominates(const Trial& a, const Trial& b);

/// Set of mutually non-dominated trials. Trials with identical objectives are
/// represented by the smallest id, so the content does not depend on the
/// order of insertion.
class ParetoArchive {
 public:
  /// Returns true if the trial was archived. Failed trials are never archived.
  bool insert(const Trial& trial);
  /// Sorted by (workload, obj1, id).
  const std::vector<Trial>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

 private:
  std::vector<Trial> members_;
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  /// Must depend only on (net, seed). Throws on failure.
  virtual double evaluate(const NetworkSpec& net, std::uint64_t seed) const = 0;
};

/// Analytic stand-in for validation RMSE:
///   0.07 + 0.3 * exp(-log10(1 + workload) / 1.5) + 0.01 * [no LSTM layer] + u,
/// u ~ U(0, 0.005) seeded by (network, seed).
class SurrogateEvaluator final : public Evaluator {
 public:
  double evaluate(const NetworkSpec& net, std::uint64_t seed) const override;
};

class FunctionEvaluator final : public Evaluator {
 public:
  using Fn = std::function<double(const NetworkSpec&, std::uint64_t)>;
  explicit FunctionEvaluator(Fn fn) : fn_(std::move(fn)) {}
  double evaluate(const NetworkSpec& net, std::uint64_t seed) const override { return fn_(net, seed); }

 private:
  Fn fn_;
};

/// Runs a shell command with the network JSON on standard input and
/// REUSEOPT_SEED in its environment; the command must print one real number
/// and exit with status 0.
class CommandEvaluator final : public Evaluator {
 public:
  explicit CommandEvaluator(std::string command) : command_(std::move(command)) {}
  double evaluate(const NetworkSpec& net, std::uint64_t seed) const override;

 private:
  std::string command_;
};

struct SearchResult {
  ParetoArchive archive;
  std::vector<Trial> trials;  // in id order, failures included
};

/// Evaluations may run on `threads` workers; archive updates happen in trial
/// order afterwards.
SearchResult run_search(const SearchSpace& space, const Evaluator& evaluator, std::uint64_t n_trials,
                        std::uint64_t seed, unsigned threads = 1);

struct Deployment {
  Assignment assignment;
  double latency_us = 0.0;
};

struct FrontRow {
  std::uint64_t trial_id = 0;
  double obj1 = 0.0;
  std::uint64_t workload = 0;
  NetworkSpec net;
  std::optional<Deployment> deployment;
};

/// Archive members sorted by workload ascending. Throws Error{Validation} on an empty archive.
std::vector<FrontRow> export_front(const ParetoArchive& archive);

/// Runs the exact reuse-factor solver for every row.
void deploy_front(std::vector<FrontRow>& rows, const CostPredictor& predictor, const LatencyBudget& budget,
                  const Weights& weights);

/// trial,obj1,workload,input_length,input_channels,layers[,luts,dsps,ff,bram,latency_cycles,latency_us,feasible,reuse_factors]
void write_front_csv(std::ostream& out, const std::vector<FrontRow>& rows);

nlohmann::json trial_to_json(const Trial& trial);
/// One JSON object per line.
void write_trials_jsonl(std::ostream& out, const std::vector<Trial>& trials);

}  // namespace reuseopt
