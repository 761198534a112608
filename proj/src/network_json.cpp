#include "reuseopt/network_json.hpp"

#include <fstream>
#include <sstream>

#include "reuseopt/error.hpp"
#include "reuseopt/io_util.hpp"

namespace reuseopt {

using nlohmann::json;

json network_to_json(const NetworkSpec& net) {
  json layers = json::array();
  for (const LayerSpec& layer : net.layers) {
    json l = {{"kind", to_string(layer.kind)}, {"size", layer.size}};
    if (layer.kernel) l["kernel"] = *layer.kernel;
    if (layer.pool) l["pool"] = *layer.pool;
    layers.push_back(std::move(l));
  }
  return {{"input_length", net.input_length}, {"input_channels", net.input_channels}, {"layers", std::move(layers)}};
}

namespace {

std::uint32_t positive_field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::Parse, where + ": missing field '" + key + "'");
  if (!it->is_number_integer() || it->get<std::int64_t>() <= 0 || it->get<std::int64_t>() > 0xFFFFFFFFll)
    throw Error(ErrorCode::Parse, where + ": field '" + key + "' must be a positive integer");
  return it->get<std::uint32_t>();
}

}  // namespace

NetworkSpec network_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "network: expected a JSON object");
  NetworkSpec net;
  net.input_length = positive_field(doc, "input_length", "network");
  net.input_channels = doc.contains("input_channels") ? positive_field(doc, "input_channels", "network") : 1;
  const auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array()) throw Error(ErrorCode::Parse, "network: 'layers' must be an array");
  for (std::size_t i = 0; i < layers->size(); ++i) {
    const json& l = (*layers)[i];
    const std::string where = "network.layers[" + std::to_string(i) + "]";
    if (!l.is_object() || !l.contains("kind") || !l["kind"].is_string())
      throw Error(ErrorCode::Parse, where + ": expected an object with a string 'kind'");
    LayerSpec spec;
    spec.kind = parse_layer_kind(l["kind"].get<std::string>());
    spec.size = positive_field(l, "size", where);
    if (l.contains("kernel")) spec.kernel = positive_field(l, "kernel", where);
    if (l.contains("pool")) spec.pool = positive_field(l, "pool", where);
    if (spec.kind == LayerKind::Conv1D && !spec.pool) spec.pool = kDefaultPool;
    net.layers.push_back(spec);
  }
  validate(net);
  return net;
}

NetworkSpec parse_network(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("network: ") + e.what());
  }
  return network_from_json(doc);
}

NetworkSpec load_network(const std::filesystem::path& path) { return parse_network(read_text_file(path)); }

std::string describe_layers(const NetworkSpec& net) {
  std::ostringstream out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (i) out << '|';
    out << to_string(l.kind) << ':' << l.size;
    if (l.kind == LayerKind::Conv1D) out << ':' << l.kernel.value_or(0) << ':' << l.pool.value_or(kDefaultPool);
  }
  return out.str();
}

}  // namespace reuseopt
