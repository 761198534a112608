#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reuseopt/cli.hpp"
#include "reuseopt/io_util.hpp"

using namespace reuseopt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kSweep = R"({"input_lengths": [64], "conv_layer_counts": [1, 2], "conv_kernels": [3],
                         "lstm_layer_counts": [0, 1], "dense_layer_counts": [1, 2]})";
const char* kNetwork = R"({"input_length": 64, "layers": [{"kind": "conv1d", "size": 16, "kernel": 3, "pool": 2},
                           {"kind": "lstm", "size": 8}, {"kind": "dense", "size": 16}, {"kind": "dense", "size": 1}]})";

// Trains a small model set once for the whole binary.
const fs::path& workspace() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "reuseopt_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    write_file_atomic(d / "sweep.json", kSweep);
    write_file_atomic(d / "net.json", kNetwork);
    const std::string out = d.string();
    REQUIRE(run({"--quiet", "--out-dir", out, "gen-data", "--sweep", out + "/sweep.json"}).code == 0);
    REQUIRE(run({"--quiet", "--out-dir", out, "train", "--data", out + "/observations.csv", "--trees", "20"}).code ==
            0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("gen-data and train write their outputs and manifests") {
  const fs::path d = workspace();
  CHECK(fs::exists(d / "observations.csv"));
  CHECK(fs::exists(d / "metrics.csv"));
  CHECK(fs::exists(d / "models" / "dense_lut.forest"));
  CHECK(fs::exists(d / "models" / "conv1d_latency.forest"));
  const auto manifest = nlohmann::json::parse(read_text_file(d / "manifest-train.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["config"]["trees"] == 20);
  CHECK(manifest.contains("wall_time_s"));
  const std::string metrics = read_text_file(d / "metrics.csv");
  CHECK(metrics.rfind("Layer,Metric,R2 Score,MAPE,RMSE %,Value Range", 0) == 0);
}

TEST_CASE("optimize is deterministic and reports a feasible assignment") {
  const std::string d = workspace().string();
  const std::vector<std::string> base{"--quiet", "--out-dir", d, "optimize", "--network", d + "/net.json",
                                      "--models", d + "/models"};
  auto args = base;
  args.insert(args.end(), {"--output", d + "/a1.json"});
  REQUIRE(run(args).code == kExitOk);
  args = base;
  args.insert(args.end(), {"--output", d + "/a2.json"});
  REQUIRE(run(args).code == kExitOk);
  const std::string a1 = read_text_file(d + "/a1.json");
  CHECK(a1 == read_text_file(d + "/a2.json"));
  const auto doc = nlohmann::json::parse(a1);
  CHECK(doc["feasible"] == true);
  CHECK(doc["layers"].size() == 4);
  CHECK(doc["totals"]["latency_cycles"].get<double>() <= 50000);

  for (const char* solver : {"sa", "stochastic"}) {
    args = base;
    args.insert(args.end(), {"--solver", solver, "--trials", "2000", "--output", d + "/h.json"});
    REQUIRE(run(args).code == kExitOk);
    CHECK(nlohmann::json::parse(read_text_file(d + "/h.json"))["scalar_cost"].get<double>() >=
          doc["scalar_cost"].get<double>());
  }
}

TEST_CASE("exit codes") {
  const std::string d = workspace().string();
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({}).code == kExitParse);
  CHECK(run({"frobnicate"}).code == kExitParse);
  CHECK(run({"optimize", "--network", d + "/net.json"}).code == kExitParse);

  const auto infeasible = run({"--quiet", "--out-dir", d, "optimize", "--network", d + "/net.json", "--models",
                               d + "/models", "--budget-cycles", "10", "--output", d + "/inf.json"});
  CHECK(infeasible.code == kExitInfeasible);
  CHECK(infeasible.err.find("10 cycles") != std::string::npos);
  CHECK(nlohmann::json::parse(read_text_file(d + "/inf.json"))["feasible"] == false);

  fs::create_directories(d + "/partial");
  fs::copy_file(d + "/models/dense_lut.forest", d + "/partial/dense_lut.forest", fs::copy_options::overwrite_existing);
  CHECK(run({"--quiet", "--out-dir", d, "optimize", "--network", d + "/net.json", "--models", d + "/partial"}).code ==
        kExitMissingModel);

  fs::create_directories(d + "/broken");
  for (const auto& e : fs::directory_iterator(d + "/models"))
    fs::copy_file(e.path(), fs::path(d) / "broken" / e.path().filename(), fs::copy_options::overwrite_existing);
  std::string bytes = read_text_file(d + "/broken/dense_ff.forest");
  write_file_atomic(d + "/broken/dense_ff.forest", bytes.substr(0, bytes.size() - 5));
  const auto corrupt =
      run({"--quiet", "--out-dir", d, "optimize", "--network", d + "/net.json", "--models", d + "/broken"});
  CHECK(corrupt.code == kExitBadModel);
  CHECK(corrupt.err.find('\n') == corrupt.err.size() - 1);

  write_file_atomic(d + "/bad.json", "{\"input_length\": 4");
  CHECK(run({"--quiet", "--out-dir", d, "optimize", "--network", d + "/bad.json", "--models", d + "/models"}).code ==
        kExitParse);
  CHECK(run({"--quiet", "--out-dir", d, "train", "--data", d + "/nope.csv"}).code == kExitFailure);
}

TEST_CASE("search writes a deployed front") {
  const std::string d = workspace().string();
  const std::string out = d + "/search";
  REQUIRE(run({"--quiet", "--seed", "3", "--out-dir", out, "search", "--trials", "40", "--models", d + "/models"})
              .code == kExitOk);
  const std::string front = read_text_file(out + "/front.csv");
  CHECK(front.find("reuse_factors") != std::string::npos);
  CHECK(fs::exists(out + "/trials.jsonl"));
  CHECK(fs::exists(out + "/manifest-search.json"));
  CHECK(run({"--quiet", "--out-dir", out, "search", "--evaluator", "oracle"}).code == kExitParse);
}

TEST_CASE("compare writes one row per method and rung") {
  const std::string d = workspace().string();
  REQUIRE(run({"--quiet", "--out-dir", d, "compare", "--network", d + "/net.json", "--models", d + "/models",
               "--trials", "100,1000", "--seeds", "0,1"})
              .code == kExitOk);
  std::istringstream csv(read_text_file(d + "/comparison.csv"));
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == 1 + 1 + 2 * 2 * 2);
  CHECK(run({"--quiet", "--out-dir", d, "compare", "--network", d + "/net.json", "--models", d + "/models",
             "--trials", "10,x"})
            .code == kExitParse);
}
