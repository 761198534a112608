#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <tuple>

#include "reuseopt/error.hpp"
#include "reuseopt/synthetic.hpp"

using namespace reuseopt;

TEST_CASE("noise-free targets equal the documented forms") {
  const auto geom = layer_geometry(LayerKind::Conv1D, 45, 1, 16, 3);
  const auto& c = synthetic_coefficients(LayerKind::Conv1D);
  const auto t = synthetic_targets(geom, 1);
  CHECK(t[4] == c.latency_per_cycle * 1 * 45 + c.latency_base);
  CHECK(t[0] == c.lut.per_block * 48 + c.lut.per_output * 16 + c.lut.base);
  CHECK(t[3] == c.dsp.per_block * 48 + c.dsp.per_output * 16 + c.dsp.base);

  const auto set = gen_synthetic(SweepSpec{}, 0.0, 1);
  for (const auto& o : set.observations) {
    const auto g = layer_geometry(o.kind, o.seq_len, o.in_features, o.layer_size, o.kernel);
    REQUIRE(o.targets == synthetic_targets(g, o.reuse_factor));
  }
}

TEST_CASE("noise stays inside its band and depends on the seed") {
  const auto clean = gen_synthetic(SweepSpec{}, 0.0, 0);
  const auto noisy = gen_synthetic(SweepSpec{}, 5.0, 0);
  REQUIRE(clean.size() == noisy.size());
  for (std::size_t i = 0; i < clean.size(); ++i)
    for (std::size_t t = 0; t < kNumTargets; ++t) {
      const double base = clean.observations[i].targets[t];
      REQUIRE(std::abs(noisy.observations[i].targets[t] - base) <= 0.05 * std::abs(base) + 1e-12);
    }
  CHECK(gen_synthetic(SweepSpec{}, 5.0, 0) == noisy);
  CHECK_FALSE(gen_synthetic(SweepSpec{}, 5.0, 1) == noisy);
  CHECK_THROWS_AS(gen_synthetic(SweepSpec{}, -1.0, 0), Error);
}

TEST_CASE("sweep enumerates every per-layer combination") {
  SweepSpec s;
  s.input_lengths = {64};
  s.conv_layer_counts = {0, 2};
  s.conv_channels = {4, 8};
  s.conv_kernels = {3};
  s.lstm_layer_counts = {1};
  s.lstm_units = {2, 3, 5};
  s.dense_layer_counts = {1, 2};
  s.dense_neurons = {1, 7};
  // conv: 1 + 2^2, lstm: 3, dense: 2 + 2^2
  const auto nets = sweep_networks(s);
  CHECK(nets.size() == 5 * 3 * 6);
  std::set<std::string> distinct;
  for (const auto& n : nets) {
    std::string key;
    for (const auto& l : n.layers) key += std::to_string(int(l.kind)) + ":" + std::to_string(l.size) + ",";
    distinct.insert(key);
  }
  CHECK(distinct.size() == nets.size());
}

TEST_CASE("generated shapes match a walk over every network") {
  SweepSpec s;
  s.input_lengths = {4, 45};  // 4 collapses after three pooled convs
  s.conv_layer_counts = {0, 1, 3};
  s.conv_channels = {2, 4};
  s.conv_kernels = {3, 5};
  s.lstm_layer_counts = {0, 2};
  s.lstm_units = {3, 6};
  s.dense_layer_counts = {1, 2};
  s.dense_neurons = {1, 5};
  s.raw_reuse_factors = {1};
  s.max_block_factor = 0;
  std::set<std::tuple<int, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>> expected, got;
  for (const auto& net : sweep_networks(s)) {
    std::vector<LayerGeometry> geoms;
    try {
      geoms = infer_geometry(net);
    } catch (const Error&) {
      continue;
    }
    for (std::size_t i = 0; i < geoms.size(); ++i)
      expected.insert({int(geoms[i].kind), geoms[i].seq_len, geoms[i].in_features, geoms[i].out_features,
                       net.layers[i].kernel.value_or(0)});
  }
  const auto set = gen_synthetic(s, 0.0, 0);
  for (const auto& o : set.observations) got.insert({int(o.kind), o.seq_len, o.in_features, o.layer_size,
                                                     o.kernel.value_or(0)});
  CHECK(set.size() == got.size());
  CHECK(got == expected);
}

TEST_CASE("generated layers are unique, valid and within the multiplier limit") {
  SweepSpec s;
  const auto set = gen_synthetic(s, 5.0, 2);
  std::set<std::tuple<int, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>> keys;
  for (const auto& o : set.observations) {
    CHECK(keys.insert({int(o.kind), o.seq_len, o.in_features, o.layer_size, o.kernel.value_or(0), o.reuse_factor})
              .second);
    CHECK((o.n_in * o.n_out) % o.reuse_factor == 0);
    CHECK(o.block_factor <= s.max_block_factor);
  }
  for (LayerKind k : kAllLayerKinds) CHECK_FALSE(set.of_kind(k).empty());

  s.max_block_factor = 0;
  CHECK(gen_synthetic(s, 0.0, 0).size() > set.size());
}

TEST_CASE("sweep json round-trip and validation") {
  SweepSpec s;
  s.input_lengths = {32};
  s.raw_reuse_factors = {1, 3};
  s.max_block_factor = 100;
  const auto back = sweep_from_json(sweep_to_json(s));
  CHECK(back.input_lengths == s.input_lengths);
  CHECK(back.raw_reuse_factors == s.raw_reuse_factors);
  CHECK(back.max_block_factor == 100);
  CHECK_THROWS_AS(sweep_from_json(nlohmann::json{{"input_lengths", {0}}}), Error);
  CHECK_THROWS_AS(sweep_from_json(nlohmann::json{{"dense_neurons", "many"}}), Error);
  CHECK_THROWS_AS(sweep_from_json(nlohmann::json::array()), Error);
}
