#pragma once

// Binary persistence for trained forests. Layout (little-endian):
//   "RUFOREST" | u32 version | u32 meta_len | meta JSON | u32 n_trees |
//   per tree: u32 n_nodes, nodes {i32 feature, f64 threshold, u32 left, u32 right, f64 value} |
//   u64 FNV-1a of everything before it

#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include "reuseopt/forest.hpp"

namespace reuseopt {

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const ForestModel& model);
/// Throws Error{VersionMismatch} for another format version and
/// Error{CorruptModel} for anything truncated or inconsistent.
ForestModel deserialize_model(std::string_view bytes);

void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

/// "<kind>_<target>.forest"
std::string model_file_name(LayerKind kind, Target target);

/// Trained estimators keyed by (layer kind, target).
class ModelSet {
 public:
  void add(ForestModel model);
  bool contains(LayerKind kind, Target target) const;
  /// Throws Error{MissingModel}.
  const ForestModel& get(LayerKind kind, Target target) const;
  std::size_t size() const { return models_.size(); }

  void save(const std::filesystem::path& dir) const;
  /// Loads every "<kind>_<target>.forest" present in `dir`. Throws Error{Io}
  /// if the directory does not exist.
  static ModelSet load(const std::filesystem::path& dir);

 private:
  std::map<std::pair<LayerKind, Target>, ForestModel> models_;
};

}  // namespace reuseopt
