#include "reuseopt/layer_algebra.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "reuseopt/error.hpp"

namespace reuseopt {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1D: return "conv1d";
    case LayerKind::LSTM: return "lstm";
    case LayerKind::Dense: return "dense";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "conv1d") return LayerKind::Conv1D;
  if (lower == "lstm") return LayerKind::LSTM;
  if (lower == "dense") return LayerKind::Dense;
  throw Error(ErrorCode::Parse, "unknown layer kind '" + std::string(name) + "'");
}

namespace {

std::string layer_label(std::size_t index, LayerKind kind) {
  return "layer " + std::to_string(index) + " (" + std::string(to_string(kind)) + ")";
}

int stage(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1D: return 0;
    case LayerKind::LSTM: return 1;
    case LayerKind::Dense: return 2;
  }
  return 3;
}

}  // namespace

void validate(const NetworkSpec& net) {
  if (net.input_length == 0) throw Error(ErrorCode::Validation, "input_length must be positive");
  if (net.input_channels == 0) throw Error(ErrorCode::Validation, "input_channels must be positive");
  if (net.layers.empty()) throw Error(ErrorCode::Validation, "network has no layers");

  int previous_stage = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    const std::string label = layer_label(i, layer.kind);
    if (layer.size == 0) throw Error(ErrorCode::Validation, label + ": size must be positive");
    if (layer.kind == LayerKind::Conv1D) {
      if (!layer.kernel || *layer.kernel == 0)
        throw Error(ErrorCode::Validation, label + ": conv1d needs a positive kernel");
      if (layer.pool && *layer.pool == 0) throw Error(ErrorCode::Validation, label + ": pool must be positive");
    } else if (layer.kernel || layer.pool) {
      throw Error(ErrorCode::Validation, label + ": kernel/pool are only allowed on conv1d layers");
    }
    const int s = stage(layer.kind);
    if (s < previous_stage)
      throw Error(ErrorCode::Validation, label + ": layers must be ordered conv1d*, lstm*, dense+");
    previous_stage = s;
  }
  if (net.layers.back().kind != LayerKind::Dense)
    throw Error(ErrorCode::Validation, "network must end with at least one dense layer");
}

LayerGeometry layer_geometry(LayerKind kind, std::uint64_t seq_len, std::uint64_t in_features,
                             std::uint64_t layer_size, std::optional<std::uint64_t> kernel, std::uint64_t pool) {
  if (seq_len == 0 || in_features == 0 || layer_size == 0)
    throw Error(ErrorCode::Validation, std::string(to_string(kind)) + ": zero-sized dimension");
  LayerGeometry g;
  g.kind = kind;
  g.seq_len = seq_len;
  g.in_features = in_features;
  g.out_features = layer_size;
  switch (kind) {
    case LayerKind::Conv1D:
      if (!kernel || *kernel == 0) throw Error(ErrorCode::Validation, "conv1d: kernel required");
      if (pool == 0) throw Error(ErrorCode::Validation, "conv1d: pool must be positive");
      g.n_in = in_features * *kernel;
      g.n_out = layer_size;
      g.out_seq_len = seq_len / pool;
      break;
    case LayerKind::LSTM:
      g.n_in = in_features;
      g.n_out = 4 * layer_size;
      g.out_seq_len = seq_len;
      break;
    case LayerKind::Dense:
      g.n_in = in_features;
      g.n_out = layer_size;
      g.out_seq_len = 1;
      break;
  }
  return g;
}

std::vector<LayerGeometry> infer_geometry(const NetworkSpec& net) {
  validate(net);
  std::vector<LayerGeometry> out;
  out.reserve(net.layers.size());

  std::uint64_t seq = net.input_length;
  std::uint64_t features = net.input_channels;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    LayerGeometry g;
    if (layer.kind == LayerKind::Dense) {
      // Flatten whatever sequence survives into the outer loop.
      g = layer_geometry(layer.kind, 1, seq * features, layer.size, std::nullopt);
    } else {
      g = layer_geometry(layer.kind, seq, features, layer.size, layer.kernel, layer.pool.value_or(kDefaultPool));
    }
    if (g.out_seq_len == 0)
      throw Error(ErrorCode::Validation,
                  layer_label(i, layer.kind) + ": pooling collapses sequence length " + std::to_string(seq) + " to 0");
    seq = g.out_seq_len;
    features = g.out_features;
    out.push_back(g);
  }
  return out;
}

std::uint64_t workload(const LayerGeometry& geom, const LayerSpec& spec) {
  switch (geom.kind) {
    case LayerKind::Conv1D:
      return geom.seq_len * spec.kernel.value_or(1) * geom.in_features * geom.out_features;
    case LayerKind::LSTM: {
      const std::uint64_t u = geom.out_features;
      return (geom.seq_len * geom.in_features + u) * (4 * u);
    }
    case LayerKind::Dense:
      return geom.in_features * geom.out_features;
  }
  return 0;
}

std::uint64_t network_workload(const NetworkSpec& net) {
  const auto geoms = infer_geometry(net);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < geoms.size(); ++i) total += workload(geoms[i], net.layers[i]);
  return total;
}

bool is_valid_reuse_factor(const LayerGeometry& geom, std::uint64_t reuse_factor) {
  return reuse_factor != 0 && geom.matrix_size() % reuse_factor == 0;
}

std::uint64_t block_factor(const LayerGeometry& geom, std::uint64_t reuse_factor) {
  if (!is_valid_reuse_factor(geom, reuse_factor))
    throw Error(ErrorCode::Validation, std::string(to_string(geom.kind)) + " layer (n_in=" +
                                           std::to_string(geom.n_in) + ", n_out=" + std::to_string(geom.n_out) +
                                           "): reuse factor " + std::to_string(reuse_factor) +
                                           " does not divide " + std::to_string(geom.matrix_size()));
  return geom.matrix_size() / reuse_factor;
}

std::vector<std::uint64_t> valid_reuse_factors(const LayerGeometry& geom) {
  const std::uint64_t n = geom.matrix_size();
  std::vector<std::uint64_t> low, high;
  for (std::uint64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    low.push_back(d);
    if (d != n / d) high.push_back(n / d);
  }
  low.insert(low.end(), high.rbegin(), high.rend());
  return low;
}

std::uint64_t correct_reuse_factor(const LayerGeometry& geom, std::uint64_t raw) {
  if (is_valid_reuse_factor(geom, raw)) return raw;
  const auto divisors = valid_reuse_factors(geom);
  auto it = std::upper_bound(divisors.begin(), divisors.end(), raw);
  return it == divisors.begin() ? 1 : *std::prev(it);
}

void check_reuse_factors(const std::vector<LayerGeometry>& geoms, const std::vector<std::uint64_t>& reuse_factors) {
  if (geoms.size() != reuse_factors.size())
    throw Error(ErrorCode::Validation, "expected " + std::to_string(geoms.size()) + " reuse factors, got " +
                                           std::to_string(reuse_factors.size()));
  for (std::size_t i = 0; i < geoms.size(); ++i) {
    if (!is_valid_reuse_factor(geoms[i], reuse_factors[i]))
      throw Error(ErrorCode::Validation, layer_label(i, geoms[i].kind) + ": reuse factor " +
                                             std::to_string(reuse_factors[i]) + " does not divide n_in*n_out=" +
                                             std::to_string(geoms[i].matrix_size()));
  }
}

}  // namespace reuseopt
