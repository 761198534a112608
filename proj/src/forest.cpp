#include "reuseopt/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "reuseopt/error.hpp"
#include "reuseopt/random.hpp"

namespace reuseopt {

double RegressionTree::predict(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

double ForestModel::predict(std::span<const double> features) const {
  if (features.size() != feature_schema.size())
    throw Error(ErrorCode::Validation, "feature vector has " + std::to_string(features.size()) +
                                           " entries, model schema expects " +
                                           std::to_string(feature_schema.size()));
  if (trees.empty()) throw Error(ErrorCode::Validation, "forest has no trees");
  double sum = 0.0;
  for (const RegressionTree& t : trees) sum += t.predict(features);
  return std::max(0.0, sum / double(trees.size()));
}

double ForestModel::predict(const Observation& obs) const {
  if (obs.kind != kind)
    throw Error(ErrorCode::Validation, "model for " + std::string(to_string(kind)) + " given a " +
                                           std::string(to_string(obs.kind)) + " observation");
  const FeatureVector f = obs.features();
  return predict(std::span<const double>(f));
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;
};

struct PendingNode {
  std::uint32_t node;
  std::size_t begin;
  std::size_t end;
  std::uint32_t depth;
};

std::uint32_t resolve_subsample(const ForestConfig& config) {
  if (config.feature_subsample != 0) return std::min<std::uint32_t>(config.feature_subsample, kNumFeatures);
  return kNumFeatures;
}

}  // namespace

RegressionTree grow_tree(const std::vector<FeatureVector>& x, const std::vector<double>& y,
                         std::vector<std::uint32_t> sample, const ForestConfig& config, std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  const std::uint32_t mtry = resolve_subsample(config);
  const std::size_t min_leaf = std::max<std::uint32_t>(config.min_leaf, 1);

  RegressionTree tree;
  tree.nodes.emplace_back();
  std::vector<PendingNode> stack{{0, 0, sample.size(), 0}};
  std::vector<std::pair<double, double>> scratch;
  std::array<int, kNumFeatures> order{};

  while (!stack.empty()) {
    const PendingNode work = stack.back();
    stack.pop_back();
    const std::size_t m = work.end - work.begin;

    double sum = 0.0;
    bool pure = true;
    const double first = y[sample[work.begin]];
    for (std::size_t i = work.begin; i < work.end; ++i) {
      sum += y[sample[i]];
      pure = pure && y[sample[i]] == first;
    }
    TreeNode& leaf = tree.nodes[work.node];
    leaf.value = pure ? first : sum / double(m);
    if (pure || m < 2 * min_leaf || (config.max_depth != 0 && work.depth >= config.max_depth)) continue;

    // Visit features in random order until `mtry` non-constant ones have been scored.
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = kNumFeatures - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);

    SplitChoice best;
    std::uint32_t scored = 0;
    for (int f : order) {
      if (scored == mtry) break;
      scratch.clear();
      for (std::size_t i = work.begin; i < work.end; ++i) scratch.emplace_back(x[sample[i]][f], y[sample[i]]);
      std::sort(scratch.begin(), scratch.end());
      if (scratch.front().first == scratch.back().first) continue;
      ++scored;

      double left_sum = 0.0;
      for (std::size_t i = 1; i < m; ++i) {
        left_sum += scratch[i - 1].second;
        if (i < min_leaf || m - i < min_leaf) continue;
        if (scratch[i - 1].first == scratch[i].first) continue;
        const double right_sum = sum - left_sum;
        // Maximizing this is equivalent to minimizing the children's summed squared error.
        const double score = left_sum * left_sum / double(i) + right_sum * right_sum / double(m - i);
        if (score > best.score) {
          double threshold = 0.5 * (scratch[i - 1].first + scratch[i].first);
          if (!(threshold < scratch[i].first)) threshold = scratch[i - 1].first;
          best = {f, threshold, score};
        }
      }
    }
    if (best.feature < 0) continue;

    auto mid_it = std::partition(sample.begin() + static_cast<std::ptrdiff_t>(work.begin),
                                 sample.begin() + static_cast<std::ptrdiff_t>(work.end),
                                 [&](std::uint32_t r) { return x[r][best.feature] <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - sample.begin());

    const auto left = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[work.node];
    parent.feature = best.feature;
    parent.threshold = best.threshold;
    parent.left = left;
    parent.right = left + 1;
    stack.push_back({left + 1, mid, work.end, work.depth + 1});
    stack.push_back({left, work.begin, mid, work.depth + 1});
  }
  return tree;
}

ForestModel train_forest(const ObservationSet& set, LayerKind kind, Target target, const ForestConfig& config) {
  if (config.n_trees == 0) throw Error(ErrorCode::Validation, "forest needs at least one tree");
  if (config.min_leaf == 0) throw Error(ErrorCode::Validation, "min_leaf must be at least 1");

  std::vector<FeatureVector> x;
  std::vector<double> y;
  for (const Observation& o : set.observations) {
    if (o.kind != kind) continue;
    x.push_back(o.features());
    y.push_back(o.target(target));
  }
  if (x.size() < 2)
    throw Error(ErrorCode::Validation, "need at least 2 " + std::string(to_string(kind)) +
                                           " observations to train, have " + std::to_string(x.size()));

  ForestModel model;
  model.kind = kind;
  model.target = target;
  model.feature_schema.assign(kFeatureNames.begin(), kFeatureNames.end());
  model.config = config;
  model.trees.resize(config.n_trees);

  const auto n = static_cast<std::uint32_t>(x.size());
  auto build = [&](std::uint32_t t) {
    // Seeds depend on the tree index only, so scheduling cannot change the result.
    const std::uint64_t tree_seed = derive_seed(config.seed, t);
    std::vector<std::uint32_t> sample(n);
    if (config.bootstrap) {
      Rng rng(derive_seed(tree_seed, 0xb0075742ull));
      for (auto& s : sample) s = static_cast<std::uint32_t>(uniform_index(rng, n));
    } else {
      std::iota(sample.begin(), sample.end(), 0u);
    }
    model.trees[t] = grow_tree(x, y, std::move(sample), config, tree_seed);
  };

  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, config.n_trees);
  if (threads <= 1) {
    for (std::uint32_t t = 0; t < config.n_trees; ++t) build(t);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::uint32_t t = next++; t < config.n_trees; t = next++) build(t);
      });
  }
  return model;
}

}  // namespace reuseopt
