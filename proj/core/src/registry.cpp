#include "ttsmt/registry.hpp"

#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/toml_lite.hpp"

namespace ttsmt {

void ModelRegistry::add(ModelSpec spec) {
  spec.validate();
  std::string name = spec.name;
  entries_.insert_or_assign(std::move(name), std::move(spec));
}

const ModelSpec* ModelRegistry::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

const ModelSpec& ModelRegistry::at(std::string_view name) const {
  if (const ModelSpec* spec = find(name)) return *spec;
  std::string known;
  for (const auto& [n, _] : entries_) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown model '" + std::string(name) + "' (known: " +
                    (known.empty() ? "none" : known) + ")");
}

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : entries_) out.push_back(n);
  return out;
}

ModelRegistry parse_registry(std::string_view toml_text, std::string_view source) {
  const TomlDocument doc = parse_toml(toml_text, source);
  ModelRegistry reg;
  for (const TomlTable& t : doc.array("model")) {
    ModelSpec spec;
    try {
      spec.name = t.require_string("name");
      spec.family = parse_model_family(t.require_string("family"));
      spec.layers = t.require_int("layers");
      spec.hidden = t.require_int("hidden");
      spec.mlp = t.require_int("mlp");
      spec.total_params = t.get_int("total_params");
      if (reg.find(spec.name)) throw ConfigError("duplicate model '" + spec.name + "'");
      reg.add(spec);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind(t.where(), 0) == 0) throw;
      throw ConfigError(t.where() + ": " + msg);
    }
  }
  if (reg.size() == 0) throw ConfigError(std::string(source) + ": no [[model]] entries");
  return reg;
}

ModelRegistry load_registry(const std::filesystem::path& path) {
  try {
    return parse_registry(read_file(path), path.string());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace ttsmt
