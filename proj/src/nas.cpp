#include "reuseopt/nas.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "reuseopt/error.hpp"
#include "reuseopt/io_util.hpp"
#include "reuseopt/network_json.hpp"
#include "reuseopt/random.hpp"
#include "reuseopt/solvers.hpp"

namespace reuseopt {

namespace {

void check_range(const IntRange& r, const char* name, std::uint32_t lowest) {
  if (r.min < lowest || r.min > r.max)
    throw Error(ErrorCode::Validation, std::string("search space: bad range for ") + name + " [" +
                                           std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
}

void check_choices(const std::vector<std::uint32_t>& v, const char* name) {
  if (v.empty() || std::find(v.begin(), v.end(), 0u) != v.end())
    throw Error(ErrorCode::Validation, std::string("search space: ") + name + " needs positive choices");
}

std::uint32_t pick(Rng& rng, const IntRange& r) {
  return r.min + static_cast<std::uint32_t>(uniform_index(rng, std::uint64_t(r.max) - r.min + 1));
}

std::uint32_t pick(Rng& rng, const std::vector<std::uint32_t>& v) { return v[uniform_index(rng, v.size())]; }

std::uint64_t saturating_pow(std::uint64_t base, std::uint32_t exp) {
  std::uint64_t r = 1;
  for (std::uint32_t i = 0; i < exp; ++i) {
    if (r > (std::uint64_t(1) << 40)) return r;
    r *= base;
  }
  return r;
}

}  // namespace

void validate(const SearchSpace& s) {
  check_choices(s.input_lengths, "input_lengths");
  if (s.input_channels == 0) throw Error(ErrorCode::Validation, "search space: input_channels must be positive");
  check_range(s.conv_blocks, "conv_blocks", 0);
  check_range(s.conv_channels, "conv_channels", 1);
  check_choices(s.conv_kernels, "conv_kernels");
  check_choices(s.conv_pools, "conv_pools");
  check_range(s.lstm_layers, "lstm_layers", 0);
  check_range(s.lstm_units, "lstm_units", 1);
  check_range(s.dense_layers, "dense_layers", 1);
  check_range(s.dense_neurons, "dense_neurons", 1);
  if (s.output_neurons && *s.output_neurons == 0)
    throw Error(ErrorCode::Validation, "search space: output_neurons must be positive");
  const std::uint32_t shortest = *std::min_element(s.input_lengths.begin(), s.input_lengths.end());
  const std::uint32_t min_pool = *std::min_element(s.conv_pools.begin(), s.conv_pools.end());
  if (saturating_pow(min_pool, s.conv_blocks.max) > shortest)
    throw Error(ErrorCode::Validation, "search space: input length " + std::to_string(shortest) +
                                           " cannot survive " + std::to_string(s.conv_blocks.max) +
                                           " pooling stages of " + std::to_string(min_pool));
}

nlohmann::json space_to_json(const SearchSpace& s) {
  auto range = [](const IntRange& r) { return nlohmann::json{{"min", r.min}, {"max", r.max}}; };
  nlohmann::json doc = {{"input_lengths", s.input_lengths},
                        {"input_channels", s.input_channels},
                        {"conv_blocks", range(s.conv_blocks)},
                        {"conv_channels", range(s.conv_channels)},
                        {"conv_kernels", s.conv_kernels},
                        {"conv_pools", s.conv_pools},
                        {"lstm_layers", range(s.lstm_layers)},
                        {"lstm_units", range(s.lstm_units)},
                        {"dense_layers", range(s.dense_layers)},
                        {"dense_neurons", range(s.dense_neurons)}};
  doc["output_neurons"] = s.output_neurons ? nlohmann::json(*s.output_neurons) : nlohmann::json(nullptr);
  return doc;
}

SearchSpace space_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "search space: expected a JSON object");
  SearchSpace s;
  try {
    auto list = [&](const char* key, std::vector<std::uint32_t>& out) {
      if (doc.contains(key)) out = doc.at(key).get<std::vector<std::uint32_t>>();
    };
    auto range = [&](const char* key, IntRange& out) {
      if (!doc.contains(key)) return;
      const auto& r = doc.at(key);
      out = {r.at("min").get<std::uint32_t>(), r.at("max").get<std::uint32_t>()};
    };
    list("input_lengths", s.input_lengths);
    if (doc.contains("input_channels")) s.input_channels = doc.at("input_channels").get<std::uint32_t>();
    range("conv_blocks", s.conv_blocks);
    range("conv_channels", s.conv_channels);
    list("conv_kernels", s.conv_kernels);
    list("conv_pools", s.conv_pools);
    range("lstm_layers", s.lstm_layers);
    range("lstm_units", s.lstm_units);
    range("dense_layers", s.dense_layers);
    range("dense_neurons", s.dense_neurons);
    if (doc.contains("output_neurons")) {
      const auto& v = doc.at("output_neurons");
      s.output_neurons = v.is_null() ? std::nullopt : std::optional<std::uint32_t>(v.get<std::uint32_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("search space: ") + e.what());
  }
  validate(s);
  return s;
}

NetworkSpec sample(const SearchSpace& space, std::uint64_t seed, std::uint64_t trial_index) {
  Rng rng(derive_seed(seed, trial_index));
  NetworkSpec net;
  net.input_length = pick(rng, space.input_lengths);
  net.input_channels = space.input_channels;

  const std::uint32_t min_pool = *std::min_element(space.conv_pools.begin(), space.conv_pools.end());
  const std::uint32_t n_conv = pick(rng, space.conv_blocks);
  std::uint64_t length = net.input_length;
  std::vector<std::uint32_t> pools;
  for (std::uint32_t i = 0; i < n_conv; ++i) {
    const std::uint32_t channels = pick(rng, space.conv_channels);
    const std::uint32_t kernel = pick(rng, space.conv_kernels);
    // Only pools that leave room for the remaining stages at the smallest pool.
    const std::uint64_t reserve = saturating_pow(min_pool, n_conv - i - 1);
    pools.clear();
    for (std::uint32_t p : space.conv_pools)
      if (length / p >= reserve && length / p >= 1) pools.push_back(p);
    const std::uint32_t pool = pick(rng, pools);
    length /= pool;
    net.layers.push_back(LayerSpec::conv1d(channels, kernel, pool));
  }
  const std::uint32_t n_lstm = pick(rng, space.lstm_layers);
  for (std::uint32_t i = 0; i < n_lstm; ++i) net.layers.push_back(LayerSpec::lstm(pick(rng, space.lstm_units)));
  const std::uint32_t n_dense = pick(rng, space.dense_layers);
  for (std::uint32_t i = 0; i < n_dense; ++i) {
    const std::uint32_t neurons = pick(rng, space.dense_neurons);
    const bool head = i + 1 == n_dense && space.output_neurons;
    net.layers.push_back(LayerSpec::dense(head ? *space.output_neurons : neurons));
  }
  return net;
}

bool dominates(const Trial& a, const Trial& b) {
  return a.obj1 <= b.obj1 && a.workload <= b.workload && (a.obj1 < b.obj1 || a.workload < b.workload);
}

bool ParetoArchive::insert(const Trial& trial) {
  if (trial.status != TrialStatus::Ok) return false;
  for (const Trial& m : members_) {
    if (dominates(m, trial)) return false;
    if (m.obj1 == trial.obj1 && m.workload == trial.workload && m.id <= trial.id) return false;
  }
  std::erase_if(members_, [&](const Trial& m) {
    return dominates(trial, m) || (m.obj1 == trial.obj1 && m.workload == trial.workload);
  });
  const auto key = [](const Trial& t) { return std::make_tuple(t.workload, t.obj1, t.id); };
  const auto pos = std::upper_bound(members_.begin(), members_.end(), trial,
                                    [&](const Trial& a, const Trial& b) { return key(a) < key(b); });
  members_.insert(pos, trial);
  return true;
}

double SurrogateEvaluator::evaluate(const NetworkSpec& net, std::uint64_t seed) const {
  const double w = double(network_workload(net));
  const bool has_lstm =
      std::any_of(net.layers.begin(), net.layers.end(), [](const LayerSpec& l) { return l.kind == LayerKind::LSTM; });
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : network_to_json(net).dump()) h = (h ^ c) * 0x100000001b3ull;
  Rng rng(derive_seed(seed, h));
  return 0.07 + 0.3 * std::exp(-std::log10(1.0 + w) / 1.5) + (has_lstm ? 0.0 : 0.01) + uniform_real(rng, 0.0, 0.005);
}

double CommandEvaluator::evaluate(const NetworkSpec& net, std::uint64_t seed) const {
  static std::atomic<std::uint64_t> counter{0};
  const auto input = std::filesystem::temp_directory_path() /
                     ("reuseopt-eval-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".json");
  write_file_atomic(input, network_to_json(net).dump());
  const std::string cmd = "REUSEOPT_SEED=" + std::to_string(seed) + " " + command_ + " < '" + input.string() + "'";

  std::string output;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(input);
    throw Error(ErrorCode::Evaluation, "cannot start evaluator: " + command_);
  }
  char buf[256];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  const int status = ::pclose(pipe);
  std::filesystem::remove(input);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw Error(ErrorCode::Evaluation, "evaluator exited with status " + std::to_string(status));

  const auto first = output.find_first_not_of(" \t\r\n");
  const auto last = output.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error(ErrorCode::Evaluation, "evaluator printed nothing");
  const std::string_view text(output.data() + first, last - first + 1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::Evaluation, "evaluator output is not a single number: '" + std::string(text) + "'");
  return value;
}

SearchResult run_search(const SearchSpace& space, const Evaluator& evaluator, std::uint64_t n_trials,
                        std::uint64_t seed, unsigned threads) {
  validate(space);
  if (n_trials == 0) throw Error(ErrorCode::Validation, "search needs at least one trial");

  SearchResult result;
  result.trials.resize(n_trials);
  auto run_trial = [&](std::uint64_t id) {
    Trial& t = result.trials[id];
    t.id = id;
    t.net = sample(space, seed, id);
    t.workload = network_workload(t.net);
    try {
      t.obj1 = evaluator.evaluate(t.net, seed);
      if (!std::isfinite(t.obj1)) throw Error(ErrorCode::Evaluation, "objective is not finite");
    } catch (const std::exception& e) {
      t.status = TrialStatus::Failed;
      t.error = e.what();
      t.obj1 = 0.0;
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(n_trials, 256))));
  if (threads == 1) {
    for (std::uint64_t id = 0; id < n_trials; ++id) run_trial(id);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::uint64_t id = next++; id < n_trials; id = next++) run_trial(id);
      });
  }
  for (const Trial& t : result.trials) result.archive.insert(t);
  return result;
}

std::vector<FrontRow> export_front(const ParetoArchive& archive) {
  if (archive.empty()) throw Error(ErrorCode::Validation, "Pareto archive is empty");
  std::vector<FrontRow> rows;
  for (const Trial& t : archive.members()) rows.push_back({t.id, t.obj1, t.workload, t.net, std::nullopt});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const FrontRow& a, const FrontRow& b) { return a.workload < b.workload; });
  return rows;
}

void deploy_front(std::vector<FrontRow>& rows, const CostPredictor& predictor, const LatencyBudget& budget,
                  const Weights& weights) {
  for (FrontRow& row : rows) {
    const CandidateTable table = build_candidates(row.net, predictor);
    Assignment a = solve_exact(table, budget, weights);
    const double us = budget.to_us(double(a.latency_cycles));
    row.deployment = Deployment{std::move(a), us};
  }
}

void write_front_csv(std::ostream& out, const std::vector<FrontRow>& rows) {
  const bool deployed = std::any_of(rows.begin(), rows.end(), [](const FrontRow& r) { return r.deployment.has_value(); });
  out << "trial,obj1,workload,input_length,input_channels,layers";
  if (deployed) out << ",luts,dsps,ff,bram,latency_cycles,latency_us,feasible,reuse_factors";
  out << '\n';
  for (const FrontRow& r : rows) {
    out << r.trial_id << ',' << format_sig4(r.obj1) << ',' << r.workload << ',' << r.net.input_length << ','
        << r.net.input_channels << ',' << describe_layers(r.net);
    if (deployed) {
      if (r.deployment) {
        const Assignment& a = r.deployment->assignment;
        out << ',' << format_sig4(a.total.lut) << ',' << format_sig4(a.total.dsp) << ',' << format_sig4(a.total.ff)
            << ',' << format_sig4(a.total.bram) << ',' << a.latency_cycles << ','
            << format_sig4(r.deployment->latency_us) << ',' << (a.feasible ? "true" : "false") << ',';
        for (std::size_t i = 0; i < a.reuse_factors.size(); ++i) out << (i ? ";" : "") << a.reuse_factors[i];
      } else {
        out << ",,,,,,,,";
      }
    }
    out << '\n';
  }
}

nlohmann::json trial_to_json(const Trial& t) {
  nlohmann::json j = {{"id", t.id},
                      {"status", t.status == TrialStatus::Ok ? "ok" : "failed"},
                      {"obj1", t.status == TrialStatus::Ok ? nlohmann::json(t.obj1) : nlohmann::json(nullptr)},
                      {"workload", t.workload},
                      {"network", network_to_json(t.net)}};
  if (t.status == TrialStatus::Failed) j["error"] = t.error;
  return j;
}

void write_trials_jsonl(std::ostream& out, const std::vector<Trial>& trials) {
  for (const Trial& t : trials) out << trial_to_json(t).dump() << '\n';
}

}  // namespace reuseopt
