#include "reuseopt/model_io.hpp"

#include <bit>
#include <cstring>

#include <nlohmann/json.hpp>

#include "reuseopt/error.hpp"
#include "reuseopt/io_util.hpp"

namespace reuseopt {

namespace {

constexpr char kMagic[8] = {'R', 'U', 'F', 'O', 'R', 'E', 'S', 'T'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    std::uint64_t bits = 0;
    if constexpr (std::is_same_v<T, double>) {
      bits = std::bit_cast<std::uint64_t>(value);
    } else {
      bits = static_cast<std::uint64_t>(static_cast<std::make_unsigned_t<T>>(value));
    }
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
  void bytes(std::string_view s) { out_.append(s); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= std::uint64_t(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(static_cast<std::make_unsigned_t<T>>(bits));
    }
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::CorruptModel, "model file truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

nlohmann::json meta_json(const ForestModel& m) {
  const ForestConfig& c = m.config;
  return {{"kind", to_string(m.kind)},
          {"target", to_string(m.target)},
          {"feature_schema", m.feature_schema},
          {"training_config",
           {{"n_trees", c.n_trees},
            {"max_depth", c.max_depth},
            {"min_leaf", c.min_leaf},
            {"feature_subsample", c.feature_subsample},
            {"bootstrap", c.bootstrap},
            {"seed", c.seed}}}};
}

}  // namespace

std::string serialize_model(const ForestModel& model) {
  Writer w;
  w.bytes(std::string_view(kMagic, sizeof kMagic));
  w.put<std::uint32_t>(kModelFormatVersion);
  const std::string meta = meta_json(model).dump();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.trees.size()));
  for (const RegressionTree& tree : model.trees) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const TreeNode& n : tree.nodes) {
      w.put<std::int32_t>(n.feature);
      w.put<double>(n.threshold);
      w.put<std::uint32_t>(n.left);
      w.put<std::uint32_t>(n.right);
      w.put<double>(n.value);
    }
  }
  w.put<std::uint64_t>(fnv1a(w.str()));
  return std::move(w.str());
}

ForestModel deserialize_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic))
    throw Error(ErrorCode::CorruptModel, "not a forest model file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(kModelFormatVersion) + ")");
  if (bytes.size() < 8 + 4 + 8) throw Error(ErrorCode::CorruptModel, "model file truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  Reader tail(bytes.substr(bytes.size() - 8));
  if (tail.get<std::uint64_t>() != fnv1a(body)) throw Error(ErrorCode::CorruptModel, "model checksum mismatch");

  Reader in(body);
  in.bytes(sizeof kMagic + 4);
  const auto meta_len = in.get<std::uint32_t>();
  ForestModel m;
  try {
    const auto meta = nlohmann::json::parse(in.bytes(meta_len));
    m.kind = parse_layer_kind(meta.at("kind").get<std::string>());
    m.target = parse_target(meta.at("target").get<std::string>());
    m.feature_schema = meta.at("feature_schema").get<std::vector<std::string>>();
    const auto& c = meta.at("training_config");
    m.config.n_trees = c.at("n_trees").get<std::uint32_t>();
    m.config.max_depth = c.at("max_depth").get<std::uint32_t>();
    m.config.min_leaf = c.at("min_leaf").get<std::uint32_t>();
    m.config.feature_subsample = c.at("feature_subsample").get<std::uint32_t>();
    m.config.bootstrap = c.at("bootstrap").get<bool>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptModel, std::string("model metadata: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptModel, std::string("model metadata: ") + e.what());
  }

  const auto n_trees = in.get<std::uint32_t>();
  if (n_trees == 0) throw Error(ErrorCode::CorruptModel, "model has no trees");
  const auto n_features = static_cast<std::int32_t>(m.feature_schema.size());
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    RegressionTree tree;
    const auto n_nodes = in.get<std::uint32_t>();
    if (n_nodes == 0 || std::size_t(n_nodes) * 28 > in.remaining())
      throw Error(ErrorCode::CorruptModel, "tree " + std::to_string(t) + " has an invalid node count");
    tree.nodes.resize(n_nodes);
    for (TreeNode& n : tree.nodes) {
      n.feature = in.get<std::int32_t>();
      n.threshold = in.get<double>();
      n.left = in.get<std::uint32_t>();
      n.right = in.get<std::uint32_t>();
      n.value = in.get<double>();
    }
    // Children always follow their parent, which also rules out cycles.
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      const TreeNode& n = tree.nodes[i];
      if (n.feature < 0) continue;
      if (n.feature >= n_features || n.left <= i || n.right <= i || n.left >= n_nodes || n.right >= n_nodes)
        throw Error(ErrorCode::CorruptModel, "tree " + std::to_string(t) + " has an invalid node");
    }
    m.trees.push_back(std::move(tree));
  }
  if (in.remaining() != 0) throw Error(ErrorCode::CorruptModel, "trailing bytes after last tree");
  return m;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

ForestModel load_model(const std::filesystem::path& path) { return deserialize_model(read_text_file(path)); }

std::string model_file_name(LayerKind kind, Target target) {
  return std::string(to_string(kind)) + "_" + std::string(to_string(target)) + ".forest";
}

void ModelSet::add(ForestModel model) {
  const auto key = std::make_pair(model.kind, model.target);
  models_.insert_or_assign(key, std::move(model));
}

bool ModelSet::contains(LayerKind kind, Target target) const { return models_.count({kind, target}) != 0; }

const ForestModel& ModelSet::get(LayerKind kind, Target target) const {
  const auto it = models_.find({kind, target});
  if (it == models_.end())
    throw Error(ErrorCode::MissingModel, "no " + std::string(to_string(target)) + " model for " +
                                             std::string(to_string(kind)) + " layers");
  return it->second;
}

void ModelSet::save(const std::filesystem::path& dir) const {
  for (const auto& [key, model] : models_) save_model(model, dir / model_file_name(key.first, key.second));
}

ModelSet ModelSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, "model directory " + dir.string() + " not found");
  ModelSet set;
  for (LayerKind kind : kAllLayerKinds)
    for (Target target : kAllTargets) {
      const auto path = dir / model_file_name(kind, target);
      if (!std::filesystem::exists(path)) continue;
      ForestModel m = load_model(path);
      if (m.kind != kind || m.target != target)
        throw Error(ErrorCode::CorruptModel, path.string() + " holds a " + std::string(to_string(m.kind)) + "/" +
                                                 std::string(to_string(m.target)) + " model");
      set.add(std::move(m));
    }
  return set;
}

}  // namespace reuseopt
