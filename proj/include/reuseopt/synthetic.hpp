#pragma once

// Stand-in for a corpus of synthesized layers. Targets follow fixed analytic
// forms per layer kind:
//   resource = a * block_factor + b * n_out + c      (lut, ff, bram, dsp)
//   latency  = d * reuse_factor * seq_len + e
// each multiplied by (1 + u), u ~ U(-noise, +noise).

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "reuseopt/observations.hpp"

namespace reuseopt {

struct ResourceCoefficients {
  double per_block = 0.0;  // a
  double per_output = 0.0; // b
  double base = 0.0;       // c
};

struct SyntheticCoefficients {
  ResourceCoefficients lut, ff, bram, dsp;
  double latency_per_cycle = 1.0;  // d
  double latency_base = 0.0;       // e
};

const SyntheticCoefficients& synthetic_coefficients(LayerKind kind);

/// Noise-free targets for a layer at reuse factor `reuse_factor`.
std::array<double, kNumTargets> synthetic_targets(const LayerGeometry& geom, std::uint64_t reuse_factor);

/// Grid of networks to "synthesize". Each layer's size (and kernel) is chosen
/// independently; raw reuse factors are corrected per layer.
struct SweepSpec {
  std::vector<std::uint32_t> input_lengths{128, 256, 512};
  std::uint32_t input_channels = 1;
  std::vector<std::uint32_t> conv_layer_counts{1, 2, 4};
  std::vector<std::uint32_t> conv_channels{16, 32};
  std::vector<std::uint32_t> conv_kernels{3, 5, 7};
  std::uint32_t conv_pool = 2;
  std::vector<std::uint32_t> lstm_layer_counts{0, 1, 2};
  std::vector<std::uint32_t> lstm_units{8, 16, 32};
  std::vector<std::uint32_t> dense_layer_counts{1, 2, 4};
  std::vector<std::uint32_t> dense_neurons{16, 32, 64};
  std::vector<std::uint64_t> raw_reuse_factors{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  // Layers needing more multipliers than this are left out, as HLS4ML refuses
  // to compile them. 0 disables the limit.
  std::uint64_t max_block_factor = 4096;
};

nlohmann::json sweep_to_json(const SweepSpec& sweep);
/// Missing keys keep their defaults. Throws Error{Parse} on bad values.
SweepSpec sweep_from_json(const nlohmann::json& doc);

/// Every network in the sweep, one per combination of per-layer choices.
std::vector<NetworkSpec> sweep_networks(const SweepSpec& sweep);

/// Unique layers of every swept network at every corrected reuse factor, with
/// synthetic targets. Throws Error{Validation} on an empty sweep or negative noise.
ObservationSet gen_synthetic(const SweepSpec& sweep, double noise_pct, std::uint64_t seed);

}  // namespace reuseopt
