#pragma once

// Random regression forest: CART trees grown by greedy variance reduction on
// bootstrap samples with per-split feature subsampling; prediction is the mean
// of the tree outputs.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reuseopt/observations.hpp"

namespace reuseopt {

struct ForestConfig {
  std::uint32_t n_trees = 100;
  std::uint32_t max_depth = 0;          // 0 = unlimited
  std::uint32_t min_leaf = 1;
  std::uint32_t feature_subsample = 0;  // features tried per split; 0 = all
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::uint32_t threads = 0;            // 0 = hardware concurrency; never affects the result

  bool operator==(const ForestConfig&) const = default;
};

/// Flat node. A leaf has feature == -1. Samples with x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  bool operator==(const RegressionTree&) const = default;
};

struct ForestModel {
  LayerKind kind = LayerKind::Dense;
  Target target = Target::Lut;
  std::vector<std::string> feature_schema;
  ForestConfig config;
  std::vector<RegressionTree> trees;

  /// Mean of tree outputs, clamped at zero. Throws Error{Validation} if the
  /// input length differs from the schema.
  double predict(std::span<const double> features) const;
  /// Throws Error{Validation} when the observation's kind differs from the model's.
  double predict(const Observation& obs) const;

  bool operator==(const ForestModel&) const = default;
};

/// Grows a single tree on rows `sample` of the design matrix. Exposed for tests.
RegressionTree grow_tree(const std::vector<FeatureVector>& x, const std::vector<double>& y,
                         std::vector<std::uint32_t> sample, const ForestConfig& config, std::uint64_t tree_seed);

/// Trains on the observations of `kind`. Throws Error{Validation} with fewer
/// than two such observations or an invalid config. Output depends only on
/// (data, config minus threads).
ForestModel train_forest(const ObservationSet& set, LayerKind kind, Target target, const ForestConfig& config);

}  // namespace reuseopt
