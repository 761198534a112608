#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reuseopt/layer_algebra.hpp"

namespace reuseopt {

enum class Target { Lut, Ff, Bram, Dsp, Latency };

inline constexpr std::size_t kNumTargets = 5;
inline constexpr Target kAllTargets[kNumTargets] = {Target::Lut, Target::Ff, Target::Bram, Target::Dsp,
                                                    Target::Latency};

std::string_view to_string(Target target);
Target parse_target(std::string_view name);

inline constexpr std::size_t kNumFeatures = 7;
using FeatureVector = std::array<double, kNumFeatures>;

/// Column order of FeatureVector.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "seq_len", "in_features", "layer_size", "reuse_factor", "n_in", "n_out", "block_factor"};

/// One synthesized layer: its shape features and measured cost.
struct Observation {
  LayerKind kind = LayerKind::Dense;
  std::uint64_t seq_len = 1;
  std::uint64_t in_features = 1;
  std::uint64_t layer_size = 1;
  std::optional<std::uint64_t> kernel;
  std::uint64_t reuse_factor = 1;
  std::uint64_t n_in = 1;
  std::uint64_t n_out = 1;
  std::uint64_t block_factor = 1;
  std::array<double, kNumTargets> targets{};

  double target(Target t) const { return targets[static_cast<std::size_t>(t)]; }
  FeatureVector features() const;

  /// Fills n_in, n_out and block_factor from the shape fields.
  static Observation make(LayerKind kind, std::uint64_t seq_len, std::uint64_t in_features,
                          std::uint64_t layer_size, std::optional<std::uint64_t> kernel,
                          std::uint64_t reuse_factor, const std::array<double, kNumTargets>& targets);

  bool operator==(const Observation&) const = default;
};

/// Features for a layer of known geometry at a given reuse factor.
FeatureVector layer_features(const LayerGeometry& geom, std::uint64_t reuse_factor);

struct ObservationSet {
  std::vector<Observation> observations;
  std::string provenance;

  std::size_t size() const { return observations.size(); }
  bool empty() const { return observations.empty(); }
  std::vector<Observation> of_kind(LayerKind kind) const;

  bool operator==(const ObservationSet&) const = default;
};

struct IngestStats {
  std::size_t rows = 0;
  std::size_t unique = 0;
};

/// CSV header, in this column order when written:
/// kind,seq_len,in_features,layer_size,kernel,reuse_factor,lut,ff,bram,dsp,latency_cycles
inline constexpr std::string_view kObservationCsvHeader =
    "kind,seq_len,in_features,layer_size,kernel,reuse_factor,lut,ff,bram,dsp,latency_cycles";

/// Parses observation rows without aggregating. Columns may appear in any
/// order but all must be present. Throws Error{Parse} naming the line.
std::vector<Observation> parse_observation_csv(std::istream& in);
std::vector<Observation> parse_observation_csv(std::string_view text);

void write_observation_csv(std::ostream& out, const ObservationSet& set);

/// Averages rows with identical features (kind, shape, reuse factor) into a
/// single observation. Order of first appearance is kept. Throws Error{Parse}
/// on empty input.
ObservationSet ingest(const std::vector<Observation>& rows, std::string provenance = {},
                      IngestStats* stats = nullptr);

/// Seeded 80/20-style split, shuffled independently within each layer kind.
std::pair<ObservationSet, ObservationSet> split_train_test(const ObservationSet& set, double train_fraction,
                                                           std::uint64_t seed);

}  // namespace reuseopt
