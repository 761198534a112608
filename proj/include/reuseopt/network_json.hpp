#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "reuseopt/layer_algebra.hpp"

namespace reuseopt {

// {"input_length": 512, "input_channels": 1,
//  "layers": [{"kind": "conv1d", "size": 16, "kernel": 3, "pool": 2}, {"kind": "dense", "size": 1}]}
nlohmann::json network_to_json(const NetworkSpec& net);
NetworkSpec network_from_json(const nlohmann::json& doc);

NetworkSpec parse_network(const std::string& text);
NetworkSpec load_network(const std::filesystem::path& path);

/// Compact one-line rendering, e.g. "conv1d:16:3:2|lstm:8|dense:1".
std::string describe_layers(const NetworkSpec& net);

}  // namespace reuseopt
