#pragma once

// Shape inference, multiply counting and reuse-factor arithmetic for
// sequential Conv1D -> LSTM -> Dense networks as laid out by HLS dataflow
// compilers. Everything here is a pure function of its arguments.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reuseopt {

enum class LayerKind { Conv1D, LSTM, Dense };

inline constexpr LayerKind kAllLayerKinds[] = {LayerKind::Conv1D, LayerKind::LSTM, LayerKind::Dense};

/// Lower-case identifier used in CSV, JSON and file names ("conv1d", "lstm", "dense").
std::string_view to_string(LayerKind kind);
/// Inverse of to_string; case-insensitive. Throws Error{Parse} on unknown names.
LayerKind parse_layer_kind(std::string_view name);

inline constexpr std::uint32_t kDefaultPool = 2;

/// Hyperparameters of one layer. `size` is output channels (Conv1D), units
/// (LSTM) or neurons (Dense). `kernel` and `pool` exist only for Conv1D.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::uint32_t size = 1;
  std::optional<std::uint32_t> kernel;
  std::optional<std::uint32_t> pool;

  static LayerSpec conv1d(std::uint32_t channels, std::uint32_t kernel, std::uint32_t pool = kDefaultPool) {
    return {LayerKind::Conv1D, channels, kernel, pool};
  }
  static LayerSpec lstm(std::uint32_t units) { return {LayerKind::LSTM, units, std::nullopt, std::nullopt}; }
  static LayerSpec dense(std::uint32_t neurons) { return {LayerKind::Dense, neurons, std::nullopt, std::nullopt}; }

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  std::uint32_t input_length = 1;
  std::uint32_t input_channels = 1;
  std::vector<LayerSpec> layers;

  bool operator==(const NetworkSpec&) const = default;
};

/// Throws Error{Validation} unless the network is a well-formed
/// Conv1D* LSTM* Dense+ pipeline with positive sizes.
void validate(const NetworkSpec& net);

/// Per-layer tensor facts. `seq_len` is the trip count of the sequential loop
/// around the n_in x n_out core; `out_seq_len` is the sequence length handed to
/// the next layer (after pooling for Conv1D).
struct LayerGeometry {
  LayerKind kind = LayerKind::Dense;
  std::uint64_t n_in = 1;
  std::uint64_t n_out = 1;
  std::uint64_t seq_len = 1;
  std::uint64_t in_features = 1;
  std::uint64_t out_features = 1;
  std::uint64_t out_seq_len = 1;

  std::uint64_t matrix_size() const { return n_in * n_out; }

  bool operator==(const LayerGeometry&) const = default;
};

/// Conv1D uses same padding and stride 1, then floor-divides the length by
/// its pool window. LSTMs keep the full sequence. The first Dense layer
/// flattens (seq_len x features).
std::vector<LayerGeometry> infer_geometry(const NetworkSpec& net);

/// Geometry of a single layer given its input tensor (seq_len x in_features).
/// `kernel` is required for Conv1D and ignored otherwise; `pool` defaults to 1
/// when unknown since it only affects out_seq_len.
LayerGeometry layer_geometry(LayerKind kind, std::uint64_t seq_len, std::uint64_t in_features,
                             std::uint64_t layer_size, std::optional<std::uint64_t> kernel,
                             std::uint64_t pool = 1);

/// Multiplies in one forward pass of the layer:
///   Conv1D  s * k * f1 * f2
///   LSTM    (s * f + u) * 4u
///   Dense   f * n
std::uint64_t workload(const LayerGeometry& geom, const LayerSpec& spec);
std::uint64_t network_workload(const NetworkSpec& net);

/// ceil(n_in * n_out / r). Throws Error{Validation} if r does not divide the
/// product.
std::uint64_t block_factor(const LayerGeometry& geom, std::uint64_t reuse_factor);

bool is_valid_reuse_factor(const LayerGeometry& geom, std::uint64_t reuse_factor);

/// All divisors of n_in * n_out, ascending.
std::vector<std::uint64_t> valid_reuse_factors(const LayerGeometry& geom);

/// Largest valid reuse factor not exceeding `raw` (1 if raw is 0).
std::uint64_t correct_reuse_factor(const LayerGeometry& geom, std::uint64_t raw);

/// Throws Error{Validation} naming the first layer whose reuse factor is invalid.
void check_reuse_factors(const std::vector<LayerGeometry>& geoms, const std::vector<std::uint64_t>& reuse_factors);

}  // namespace reuseopt
