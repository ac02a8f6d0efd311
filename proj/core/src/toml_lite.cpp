#include "ttsmt/toml_lite.hpp"

#include <cctype>
#include <charconv>

#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/unicode.hpp"

namespace ttsmt {

std::optional<std::string> TomlTable::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw ConfigError(where_ + ": key '" + key + "' must be a string");
}

std::optional<std::int64_t> TomlTable::get_int(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
  throw ConfigError(where_ + ": key '" + key + "' must be an integer");
}

std::optional<double> TomlTable::get_double(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* v = std::get_if<double>(&it->second)) return *v;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*v);
  throw ConfigError(where_ + ": key '" + key + "' must be a number");
}

std::optional<bool> TomlTable::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* v = std::get_if<bool>(&it->second)) return *v;
  throw ConfigError(where_ + ": key '" + key + "' must be a boolean");
}

std::optional<std::vector<std::string>> TomlTable::get_string_list(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto* arr = std::get_if<std::vector<TomlScalar>>(&it->second);
  if (!arr) throw ConfigError(where_ + ": key '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    const auto* s = std::get_if<std::string>(&item);
    if (!s) throw ConfigError(where_ + ": key '" + key + "' must be an array of strings");
    out.push_back(*s);
  }
  return out;
}

std::string TomlTable::require_string(const std::string& key) const {
  auto v = get_string(key);
  if (!v) throw ConfigError(where_ + ": missing key '" + key + "'");
  return *v;
}

std::int64_t TomlTable::require_int(const std::string& key) const {
  auto v = get_int(key);
  if (!v) throw ConfigError(where_ + ": missing key '" + key + "'");
  return *v;
}

const TomlTable* TomlDocument::table(const std::string& name) const {
  auto it = tables.find(name);
  return it == tables.end() ? nullptr : &it->second;
}

const std::vector<TomlTable>& TomlDocument::array(const std::string& name) const {
  static const std::vector<TomlTable> kEmpty;
  auto it = arrays.find(name);
  return it == arrays.end() ? kEmpty : it->second;
}

std::map<std::string, const TomlTable*> TomlDocument::subtables(const std::string& prefix) const {
  std::map<std::string, const TomlTable*> out;
  const std::string p = prefix + ".";
  for (const auto& [name, t] : tables) {
    if (name.size() > p.size() && name.compare(0, p.size(), p) == 0) {
      out[name.substr(p.size())] = &t;
    }
  }
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  TomlDocument run() {
    TomlDocument doc;
    doc.tables.emplace("", TomlTable(std::string(source_) + ":1"));
    TomlTable* current = &doc.tables[""];
    while (!at_end()) {
      skip_inline_space();
      if (at_end()) break;
      char c = peek();
      if (c == '\n') {
        advance();
        continue;
      }
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '[') {
        const std::string where = location();
        advance();
        bool is_array = false;
        if (!at_end() && peek() == '[') {
          is_array = true;
          advance();
        }
        skip_inline_space();
        std::string name = parse_header_name();
        skip_inline_space();
        expect(']');
        if (is_array) expect(']');
        end_of_line();
        if (is_array) {
          auto& vec = doc.arrays[name];
          vec.emplace_back(where);
          current = &vec.back();
        } else {
          if (doc.tables.count(name)) fail("duplicate table [" + name + "]");
          current = &doc.tables.emplace(name, TomlTable(where)).first->second;
        }
        continue;
      }
      std::string key = parse_key();
      skip_inline_space();
      expect('=');
      skip_space_and_newlines_if_in_array(false);
      TomlValue value = parse_value();
      if (current->has(key)) fail("duplicate key '" + key + "'");
      current->set(key, std::move(value));
      end_of_line();
    }
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }
  std::string location() const { return std::string(source_) + ":" + std::to_string(line_); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(location() + ": " + msg);
  }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  void skip_inline_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  void skip_comment() {
    while (!at_end() && peek() != '\n') advance();
  }

  void skip_space_and_newlines_if_in_array(bool in_array) {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (in_array && c == '\n') {
        advance();
      } else if (in_array && c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline_space();
    if (at_end()) return;
    if (peek() == '#') {
      skip_comment();
    }
    if (!at_end()) {
      if (peek() != '\n') fail("unexpected trailing characters");
      advance();
    }
  }

  static bool is_bare(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key() {
    if (!at_end() && (peek() == '"' || peek() == '\'')) return parse_string();
    std::string key;
    while (!at_end() && is_bare(peek())) {
      key.push_back(peek());
      advance();
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::string parse_header_name() {
    std::string name = parse_key();
    skip_inline_space();
    while (!at_end() && peek() == '.') {
      advance();
      skip_inline_space();
      name += "." + parse_key();
      skip_inline_space();
    }
    return name;
  }

  std::string parse_string() {
    const char quote = peek();
    advance();
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = peek();
      advance();
      if (c == quote) break;
      if (c == '\\' && quote == '"') {
        if (at_end()) fail("unterminated escape");
        char e = peek();
        advance();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'u': {
            if (pos_ + 4 > text_.size()) fail("short \\u escape");
            unsigned cp = 0;
            auto r = std::from_chars(text_.data() + pos_, text_.data() + pos_ + 4, cp, 16);
            if (r.ec != std::errc{} || r.ptr != text_.data() + pos_ + 4) fail("bad \\u escape");
            pos_ += 4;
            unicode::append(out, static_cast<char32_t>(cp));
            break;
          }
          default:
            fail(std::string("unknown escape \\") + e);
        }
        continue;
      }
      out.push_back(c);
    }
    return out;
  }

  TomlScalar parse_scalar() {
    if (at_end()) fail("expected a value");
    char c = peek();
    if (c == '"' || c == '\'') return parse_string();
    std::string token;
    while (!at_end()) {
      char d = peek();
      if (d == ',' || d == ']' || d == '\n' || d == '#' || d == ' ' || d == '\t' || d == '\r') break;
      token.push_back(d);
      advance();
    }
    if (token == "true") return true;
    if (token == "false") return false;
    if (token.empty()) fail("expected a value");
    std::string digits;
    for (char d : token) {
      if (d != '_') digits.push_back(d);
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos &&
                          digits.rfind("0x", 0) != 0;
    const char* first = digits.data();
    const char* last = digits.data() + digits.size();
    if (*first == '+') ++first;
    if (is_float) {
      double v = 0;
      auto r = std::from_chars(first, last, v);
      if (r.ec != std::errc{} || r.ptr != last) fail("invalid number '" + token + "'");
      return v;
    }
    std::int64_t v = 0;
    auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc{} || r.ptr != last) fail("invalid value '" + token + "'");
    return v;
  }

  TomlValue parse_value() {
    if (!at_end() && peek() == '[') {
      advance();
      std::vector<TomlScalar> items;
      while (true) {
        skip_space_and_newlines_if_in_array(true);
        if (at_end()) fail("unterminated array");
        if (peek() == ']') {
          advance();
          break;
        }
        items.push_back(parse_scalar());
        skip_space_and_newlines_if_in_array(true);
        if (!at_end() && peek() == ',') {
          advance();
          continue;
        }
        skip_space_and_newlines_if_in_array(true);
        expect(']');
        break;
      }
      return items;
    }
    return std::visit([](auto&& v) -> TomlValue { return v; }, parse_scalar());
  }

  std::string_view text_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

TomlDocument parse_toml(std::string_view text, std::string_view source) {
  return Parser(text, source).run();
}

TomlDocument load_toml(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const ValidationError&) {
    throw ConfigError("cannot open config '" + path.string() + "'");
  }
  return parse_toml(text, path.string());
}

}  // namespace ttsmt
