#include "reuseopt/observations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "reuseopt/error.hpp"
#include "reuseopt/io_util.hpp"
#include "reuseopt/random.hpp"

namespace reuseopt {

std::string_view to_string(Target target) {
  switch (target) {
    case Target::Lut: return "lut";
    case Target::Ff: return "ff";
    case Target::Bram: return "bram";
    case Target::Dsp: return "dsp";
    case Target::Latency: return "latency";
  }
  return "unknown";
}

Target parse_target(std::string_view name) {
  for (Target t : kAllTargets)
    if (to_string(t) == name) return t;
  if (name == "latency_cycles") return Target::Latency;
  throw Error(ErrorCode::Parse, "unknown target '" + std::string(name) + "'");
}

FeatureVector Observation::features() const {
  return {double(seq_len), double(in_features), double(layer_size), double(reuse_factor),
          double(n_in),    double(n_out),       double(block_factor)};
}

Observation Observation::make(LayerKind kind, std::uint64_t seq_len, std::uint64_t in_features,
                              std::uint64_t layer_size, std::optional<std::uint64_t> kernel,
                              std::uint64_t reuse_factor, const std::array<double, kNumTargets>& targets) {
  if (reuse_factor == 0) throw Error(ErrorCode::Validation, "reuse_factor must be positive");
  const LayerGeometry g = layer_geometry(kind, seq_len, in_features, layer_size, kernel);
  Observation o;
  o.kind = kind;
  o.seq_len = seq_len;
  o.in_features = in_features;
  o.layer_size = layer_size;
  o.kernel = kind == LayerKind::Conv1D ? kernel : std::nullopt;
  o.reuse_factor = reuse_factor;
  o.n_in = g.n_in;
  o.n_out = g.n_out;
  o.block_factor = (g.matrix_size() + reuse_factor - 1) / reuse_factor;
  o.targets = targets;
  return o;
}

FeatureVector layer_features(const LayerGeometry& geom, std::uint64_t reuse_factor) {
  const std::uint64_t bf = (geom.matrix_size() + reuse_factor - 1) / reuse_factor;
  return {double(geom.seq_len), double(geom.in_features), double(geom.out_features), double(reuse_factor),
          double(geom.n_in),    double(geom.n_out),       double(bf)};
}

std::vector<Observation> ObservationSet::of_kind(LayerKind kind) const {
  std::vector<Observation> out;
  for (const Observation& o : observations)
    if (o.kind == kind) out.push_back(o);
  return out;
}

namespace {

constexpr std::array<std::string_view, 11> kColumns = {"kind",         "seq_len", "in_features", "layer_size",
                                                       "kernel",       "reuse_factor", "lut", "ff",
                                                       "bram",         "dsp",     "latency_cycles"};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void row_error(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::Parse, "observations line " + std::to_string(line) + ": " + msg);
}

std::uint64_t parse_uint(std::string_view s, std::size_t line, std::string_view column) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
    row_error(line, "column '" + std::string(column) + "' must be a positive integer, got '" + std::string(s) + "'");
  return v;
}

double parse_real(std::string_view s, std::size_t line, std::string_view column) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v) || v < 0)
    row_error(line, "column '" + std::string(column) + "' must be a finite non-negative number, got '" +
                        std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<Observation> parse_observation_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::array<std::size_t, kColumns.size()> index{};
  bool have_header = false;
  std::size_t n_header = 0;
  std::vector<Observation> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      n_header = fields.size();
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end()) row_error(line_no, "header lacks column '" + std::string(kColumns[c]) + "'");
        index[c] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }
    if (fields.size() != n_header)
      row_error(line_no, "expected " + std::to_string(n_header) + " fields, got " + std::to_string(fields.size()));
    auto col = [&](std::size_t c) { return fields[index[c]]; };

    LayerKind kind;
    try {
      kind = parse_layer_kind(col(0));
    } catch (const Error& e) {
      row_error(line_no, e.what());
    }
    const auto seq_len = parse_uint(col(1), line_no, kColumns[1]);
    const auto in_features = parse_uint(col(2), line_no, kColumns[2]);
    const auto layer_size = parse_uint(col(3), line_no, kColumns[3]);
    std::optional<std::uint64_t> kernel;
    if (kind == LayerKind::Conv1D) {
      kernel = parse_uint(col(4), line_no, kColumns[4]);
    } else if (!col(4).empty()) {
      row_error(line_no, "kernel must be empty for " + std::string(to_string(kind)) + " layers");
    }
    const auto reuse_factor = parse_uint(col(5), line_no, kColumns[5]);
    std::array<double, kNumTargets> targets{};
    for (std::size_t t = 0; t < kNumTargets; ++t) targets[t] = parse_real(col(6 + t), line_no, kColumns[6 + t]);
    try {
      rows.push_back(Observation::make(kind, seq_len, in_features, layer_size, kernel, reuse_factor, targets));
    } catch (const Error& e) {
      row_error(line_no, e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::Parse, "observations: empty input (header required)");
  return rows;
}

std::vector<Observation> parse_observation_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_observation_csv(in);
}

void write_observation_csv(std::ostream& out, const ObservationSet& set) {
  out << kObservationCsvHeader << '\n';
  for (const Observation& o : set.observations) {
    out << to_string(o.kind) << ',' << o.seq_len << ',' << o.in_features << ',' << o.layer_size << ',';
    if (o.kernel) out << *o.kernel;
    out << ',' << o.reuse_factor;
    for (double t : o.targets) out << ',' << format_exact(t);
    out << '\n';
  }
}

ObservationSet ingest(const std::vector<Observation>& rows, std::string provenance, IngestStats* stats) {
  if (rows.empty()) throw Error(ErrorCode::Parse, "observations: no data rows");

  using Key = std::tuple<int, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;
  std::map<Key, std::size_t> slot;
  std::vector<Observation> unique;
  std::vector<std::array<double, kNumTargets>> sums;
  std::vector<std::size_t> counts;

  for (const Observation& row : rows) {
    const Key key{static_cast<int>(row.kind), row.seq_len, row.in_features, row.layer_size, row.kernel.value_or(0),
                  row.reuse_factor};
    auto [it, inserted] = slot.try_emplace(key, unique.size());
    if (inserted) {
      unique.push_back(row);
      sums.push_back(row.targets);
      counts.push_back(1);
    } else {
      for (std::size_t t = 0; t < kNumTargets; ++t) sums[it->second][t] += row.targets[t];
      ++counts[it->second];
    }
  }
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (counts[i] == 1) continue;
    for (std::size_t t = 0; t < kNumTargets; ++t) unique[i].targets[t] = sums[i][t] / double(counts[i]);
  }
  if (stats) *stats = {rows.size(), unique.size()};
  return {std::move(unique), std::move(provenance)};
}

std::pair<ObservationSet, ObservationSet> split_train_test(const ObservationSet& set, double train_fraction,
                                                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw Error(ErrorCode::Validation, "train fraction must be in (0, 1]");
  std::vector<bool> in_train(set.size(), false);
  for (LayerKind kind : kAllLayerKinds) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < set.size(); ++i)
      if (set.observations[i].kind == kind) idx.push_back(i);
    if (idx.empty()) continue;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
    for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[uniform_index(rng, i + 1)]);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * double(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size());
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
  }
  ObservationSet train{{}, set.provenance}, test{{}, set.provenance};
  for (std::size_t i = 0; i < set.size(); ++i)
    (in_train[i] ? train : test).observations.push_back(set.observations[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace reuseopt
