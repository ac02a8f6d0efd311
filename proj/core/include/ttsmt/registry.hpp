#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ttsmt/compute.hpp"

namespace ttsmt {

/// Model shapes keyed by name, loaded from a models.toml with one [[model]]
/// table per entry: name, family, layers, hidden, mlp, optional total_params.
class ModelRegistry {
 public:
  void add(ModelSpec spec);
  const ModelSpec* find(std::string_view name) const;
  /// Throws ConfigError listing the known names.
  const ModelSpec& at(std::string_view name) const;
  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, ModelSpec, std::less<>> entries_;
};

ModelRegistry parse_registry(std::string_view toml_text, std::string_view source = "<models>");
ModelRegistry load_registry(const std::filesystem::path& path);

}  // namespace ttsmt
