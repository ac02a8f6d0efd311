#include "ttsmt/languages.hpp"

#include "ttsmt/error.hpp"

namespace ttsmt {

bool is_valid_language_code(std::string_view code) {
  if (code.size() < 2 || code.size() > 3) return false;
  for (char c : code) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

const LanguageTable& LanguageTable::defaults() {
  static const LanguageTable table = [] {
    LanguageTable t;
    const std::vector<std::string> latin = {"Latin"};
    t.set({"en", "English", latin});
    t.set({"de", "German", latin});
    t.set({"es", "Spanish", latin});
    t.set({"is", "Icelandic", latin});
    t.set({"fr", "French", latin});
    t.set({"it", "Italian", latin});
    t.set({"pt", "Portuguese", latin});
    t.set({"nl", "Dutch", latin});
    t.set({"cs", "Czech", latin});
    t.set({"pl", "Polish", latin});
    t.set({"tr", "Turkish", latin});
    t.set({"ja", "Japanese", {"Hiragana", "Katakana", "Han", "Latin"}});
    t.set({"zh", "Chinese", {"Han", "Latin"}});
    t.set({"ko", "Korean", {"Hangul", "Han", "Latin"}});
    t.set({"ru", "Russian", {"Cyrillic", "Latin"}});
    t.set({"uk", "Ukrainian", {"Cyrillic", "Latin"}});
    t.set({"hi", "Hindi", {"Devanagari", "Latin"}});
    t.set({"ar", "Arabic", {"Arabic", "Latin"}});
    t.set({"he", "Hebrew", {"Hebrew", "Latin"}});
    return t;
  }();
  return table;
}

void LanguageTable::set(LanguageInfo info) {
  if (!is_valid_language_code(info.code)) {
    throw ConfigError("invalid language code '" + info.code + "'");
  }
  std::string code = info.code;
  entries_[code] = std::move(info);
}

bool LanguageTable::contains(std::string_view code) const { return find(code) != nullptr; }

const LanguageInfo* LanguageTable::find(std::string_view code) const {
  auto it = entries_.find(code);
  return it == entries_.end() ? nullptr : &it->second;
}

const LanguageInfo& LanguageTable::at(std::string_view code) const {
  const LanguageInfo* info = find(code);
  if (!info) {
    throw ConfigError("no language configured for code '" + std::string(code) + "'");
  }
  return *info;
}

}  // namespace ttsmt
