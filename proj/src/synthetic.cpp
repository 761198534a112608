#include "reuseopt/synthetic.hpp"

#include <set>
#include <tuple>

#include "reuseopt/error.hpp"
#include "reuseopt/random.hpp"

namespace reuseopt {

namespace {

// Scales loosely follow the value ranges reported for a Zynq UltraScale+
// part at 250 MHz with 16-bit fixed point.
const SyntheticCoefficients kConv1D{
    {60.0, 40.0, 2100.0}, {25.0, 20.0, 1000.0}, {0.02, 0.5, 1.0}, {1.0, 0.0, 0.0}, 1.0, 45.0};
const SyntheticCoefficients kLstm{
    {80.0, 50.0, 18000.0}, {30.0, 25.0, 7600.0}, {0.05, 1.0, 16.0}, {1.0, 0.1, 0.0}, 1.0, 209.0};
const SyntheticCoefficients kDense{
    {50.0, 10.0, 1200.0}, {20.0, 8.0, 1250.0}, {0.01, 0.2, 0.0}, {1.0, 0.0, 0.0}, 1.0, 7.0};

double resource(const ResourceCoefficients& c, double block, double n_out) {
  return c.per_block * block + c.per_output * n_out + c.base;
}

}  // namespace

const SyntheticCoefficients& synthetic_coefficients(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1D: return kConv1D;
    case LayerKind::LSTM: return kLstm;
    case LayerKind::Dense: return kDense;
  }
  return kDense;
}

std::array<double, kNumTargets> synthetic_targets(const LayerGeometry& geom, std::uint64_t reuse_factor) {
  const SyntheticCoefficients& c = synthetic_coefficients(geom.kind);
  const double block = double((geom.matrix_size() + reuse_factor - 1) / reuse_factor);
  const double n_out = double(geom.n_out);
  return {resource(c.lut, block, n_out), resource(c.ff, block, n_out), resource(c.bram, block, n_out),
          resource(c.dsp, block, n_out),
          c.latency_per_cycle * double(reuse_factor) * double(geom.seq_len) + c.latency_base};
}

namespace {

template <typename T>
std::vector<T> uint_list(const nlohmann::json& doc, const char* key, std::vector<T> fallback, bool allow_zero) {
  if (!doc.contains(key)) return fallback;
  const auto& arr = doc[key];
  if (!arr.is_array()) throw Error(ErrorCode::Parse, std::string("sweep: '") + key + "' must be an array");
  std::vector<T> out;
  for (const auto& v : arr) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < (allow_zero ? 0 : 1))
      throw Error(ErrorCode::Parse, std::string("sweep: '") + key + "' entries must be " +
                                        (allow_zero ? "non-negative" : "positive") + " integers");
    out.push_back(v.get<T>());
  }
  return out;
}

std::uint32_t positive(const nlohmann::json& doc, const char* key, std::uint32_t fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc[key];
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
    throw Error(ErrorCode::Parse, std::string("sweep: '") + key + "' must be a positive integer");
  return v.get<std::uint32_t>();
}

}  // namespace

nlohmann::json sweep_to_json(const SweepSpec& s) {
  return {{"input_lengths", s.input_lengths},         {"input_channels", s.input_channels},
          {"conv_layer_counts", s.conv_layer_counts}, {"conv_channels", s.conv_channels},
          {"conv_kernels", s.conv_kernels},           {"conv_pool", s.conv_pool},
          {"lstm_layer_counts", s.lstm_layer_counts}, {"lstm_units", s.lstm_units},
          {"dense_layer_counts", s.dense_layer_counts}, {"dense_neurons", s.dense_neurons},
          {"raw_reuse_factors", s.raw_reuse_factors}, {"max_block_factor", s.max_block_factor}};
}

SweepSpec sweep_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "sweep: expected a JSON object");
  SweepSpec d;
  SweepSpec s;
  s.input_lengths = uint_list(doc, "input_lengths", d.input_lengths, false);
  s.input_channels = positive(doc, "input_channels", d.input_channels);
  s.conv_layer_counts = uint_list(doc, "conv_layer_counts", d.conv_layer_counts, true);
  s.conv_channels = uint_list(doc, "conv_channels", d.conv_channels, false);
  s.conv_kernels = uint_list(doc, "conv_kernels", d.conv_kernels, false);
  s.conv_pool = positive(doc, "conv_pool", d.conv_pool);
  s.lstm_layer_counts = uint_list(doc, "lstm_layer_counts", d.lstm_layer_counts, true);
  s.lstm_units = uint_list(doc, "lstm_units", d.lstm_units, false);
  s.dense_layer_counts = uint_list(doc, "dense_layer_counts", d.dense_layer_counts, false);
  s.dense_neurons = uint_list(doc, "dense_neurons", d.dense_neurons, false);
  s.raw_reuse_factors = uint_list(doc, "raw_reuse_factors", d.raw_reuse_factors, false);
  if (doc.contains("max_block_factor")) {
    const auto& v = doc["max_block_factor"];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw Error(ErrorCode::Parse, "sweep: 'max_block_factor' must be a non-negative integer");
    s.max_block_factor = v.get<std::uint64_t>();
  }
  return s;
}

namespace {

// Every length-`count` sequence over `options` (the Cartesian power).
std::vector<std::vector<std::uint32_t>> per_layer_choices(std::uint32_t count,
                                                          const std::vector<std::uint32_t>& options) {
  std::vector<std::vector<std::uint32_t>> out{{}};
  for (std::uint32_t i = 0; i < count; ++i) {
    std::vector<std::vector<std::uint32_t>> next;
    next.reserve(out.size() * options.size());
    for (const auto& prefix : out)
      for (std::uint32_t v : options) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<NetworkSpec> sweep_networks(const SweepSpec& sweep) {
  std::vector<NetworkSpec> out;
  for (std::uint32_t input : sweep.input_lengths)
    for (std::uint32_t n_conv : sweep.conv_layer_counts)
      for (const auto& channels : per_layer_choices(n_conv, sweep.conv_channels))
        for (const auto& kernels : per_layer_choices(n_conv, sweep.conv_kernels))
          for (std::uint32_t n_lstm : sweep.lstm_layer_counts)
            for (const auto& units : per_layer_choices(n_lstm, sweep.lstm_units))
              for (std::uint32_t n_dense : sweep.dense_layer_counts)
                for (const auto& neurons : per_layer_choices(n_dense, sweep.dense_neurons)) {
                  NetworkSpec net;
                  net.input_length = input;
                  net.input_channels = sweep.input_channels;
                  for (std::uint32_t i = 0; i < n_conv; ++i)
                    net.layers.push_back(LayerSpec::conv1d(channels[i], kernels[i], sweep.conv_pool));
                  for (std::uint32_t u : units) net.layers.push_back(LayerSpec::lstm(u));
                  for (std::uint32_t n : neurons) net.layers.push_back(LayerSpec::dense(n));
                  out.push_back(std::move(net));
                }
  return out;
}

ObservationSet gen_synthetic(const SweepSpec& sweep, double noise_pct, std::uint64_t seed) {
  if (!(noise_pct >= 0.0)) throw Error(ErrorCode::Validation, "noise_pct must be non-negative");
  if (sweep.input_lengths.empty() || sweep.conv_layer_counts.empty() || sweep.lstm_layer_counts.empty() ||
      sweep.dense_layer_counts.empty() || sweep.raw_reuse_factors.empty())
    throw Error(ErrorCode::Validation, "sweep spec yields no networks");

  // A layer's shape depends only on the (seq_len, features) state entering its stage, so the three stages are
  // enumerated separately over the distinct states the previous stage can end in. This visits the same set of
  // shapes as walking sweep_networks() without materializing millions of networks.
  using Shape = std::tuple<int, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;
  using State = std::pair<std::uint64_t, std::uint64_t>;
  std::set<Shape> seen;
  std::vector<std::pair<LayerGeometry, std::optional<std::uint64_t>>> shapes;
  auto record = [&](const LayerGeometry& g, std::optional<std::uint64_t> kernel) {
    if (seen.insert({static_cast<int>(g.kind), g.seq_len, g.in_features, g.out_features, kernel.value_or(0)}).second)
      shapes.emplace_back(g, kernel);
  };
  auto add_state = [](std::vector<State>& states, std::set<State>& index, State s) {
    if (index.insert(s).second) states.push_back(s);
  };

  std::vector<State> conv_ends, lstm_ends;
  std::set<State> conv_index, lstm_index;
  for (std::uint32_t input : sweep.input_lengths)
    for (std::uint32_t n_conv : sweep.conv_layer_counts)
      for (const auto& channels : per_layer_choices(n_conv, sweep.conv_channels))
        for (const auto& kernels : per_layer_choices(n_conv, sweep.conv_kernels)) {
          State s{input, sweep.input_channels};
          std::vector<LayerGeometry> stage;
          bool collapsed = false;
          for (std::uint32_t i = 0; i < n_conv && !collapsed; ++i) {
            stage.push_back(layer_geometry(LayerKind::Conv1D, s.first, s.second, channels[i], kernels[i],
                                           sweep.conv_pool));
            collapsed = stage.back().out_seq_len == 0;
            s = {stage.back().out_seq_len, channels[i]};
          }
          if (collapsed) continue;  // the compiler would reject every network built on this prefix
          for (std::uint32_t i = 0; i < n_conv; ++i) record(stage[i], kernels[i]);
          add_state(conv_ends, conv_index, s);
        }
  for (const State& start : conv_ends)
    for (std::uint32_t n_lstm : sweep.lstm_layer_counts)
      for (const auto& units : per_layer_choices(n_lstm, sweep.lstm_units)) {
        State s = start;
        for (std::uint32_t u : units) {
          record(layer_geometry(LayerKind::LSTM, s.first, s.second, u, std::nullopt), std::nullopt);
          s.second = u;
        }
        add_state(lstm_ends, lstm_index, s);
      }
  for (const State& start : lstm_ends)
    for (std::uint32_t n_dense : sweep.dense_layer_counts)
      for (const auto& neurons : per_layer_choices(n_dense, sweep.dense_neurons)) {
        std::uint64_t features = start.first * start.second;
        for (std::uint32_t n : neurons) {
          record(layer_geometry(LayerKind::Dense, 1, features, n, std::nullopt), std::nullopt);
          features = n;
        }
      }
  if (shapes.empty()) throw Error(ErrorCode::Validation, "sweep spec yields no networks");

  std::vector<std::pair<LayerGeometry, Observation>> layers;
  for (const auto& [g, kernel] : shapes) {
    std::set<std::uint64_t> rfs;
    for (std::uint64_t raw : sweep.raw_reuse_factors) {
      const std::uint64_t rf = correct_reuse_factor(g, raw);
      if (sweep.max_block_factor != 0 && block_factor(g, rf) > sweep.max_block_factor) continue;
      if (rfs.insert(rf).second)
        layers.emplace_back(g, Observation::make(g.kind, g.seq_len, g.in_features, g.out_features, kernel, rf, {}));
    }
  }

  const double spread = noise_pct / 100.0;
  ObservationSet set;
  set.provenance = "synthetic sweep, noise " + std::to_string(noise_pct) + "%, seed " + std::to_string(seed);
  set.observations.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& [geom, obs] = layers[i];
    obs.targets = synthetic_targets(geom, obs.reuse_factor);
    if (spread > 0.0) {
      Rng rng(derive_seed(seed, i));
      for (double& t : obs.targets) t *= 1.0 + uniform_real(rng, -spread, spread);
    }
    set.observations.push_back(obs);
  }
  return set;
}

}  // namespace reuseopt
