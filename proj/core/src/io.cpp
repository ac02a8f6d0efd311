#include "ttsmt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "ttsmt/error.hpp"

namespace ttsmt {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory '" + path.parent_path().string() +
                    "': " + ec.message());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write '" + tmp.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw IoError("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path.string() + "'");
  }
}

void for_each_jsonl(const fs::path& path,
                    const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
    }
    if (!record.is_object()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": record is not a JSON object");
    }
    fn(line_no, record);
  }
}

std::string dump_line(const json& record) {
  return record.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    return "nan";
  }
  return std::string(buf, ptr);
}

std::string text_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

namespace {

const json& require(const json& record, std::string_view key, std::string_view where) {
  auto it = record.find(std::string(key));
  if (it == record.end()) {
    throw ValidationError(std::string(where) + ": missing field \"" + std::string(key) + "\"");
  }
  return *it;
}

[[noreturn]] void wrong_type(std::string_view key, std::string_view where,
                             std::string_view expected) {
  throw ValidationError(std::string(where) + ": field \"" + std::string(key) +
                        "\" must be " + std::string(expected));
}

}  // namespace

std::string get_string(const json& record, std::string_view key, std::string_view where) {
  const json& v = require(record, key, where);
  if (!v.is_string()) wrong_type(key, where, "a string");
  return v.get<std::string>();
}

std::int64_t get_int(const json& record, std::string_view key, std::string_view where) {
  const json& v = require(record, key, where);
  if (!v.is_number_integer()) wrong_type(key, where, "an integer");
  return v.get<std::int64_t>();
}

double get_number(const json& record, std::string_view key, std::string_view where) {
  const json& v = require(record, key, where);
  if (!v.is_number()) wrong_type(key, where, "a number");
  return v.get<double>();
}

std::optional<double> get_optional_number(const json& record, std::string_view key,
                                          std::string_view where) {
  auto it = record.find(std::string(key));
  if (it == record.end() || it->is_null()) {
    return std::nullopt;
  }
  if (!it->is_number()) wrong_type(key, where, "a number or null");
  return it->get<double>();
}

std::vector<std::string> get_string_list(const json& record, std::string_view key,
                                         std::string_view where) {
  const json& v = require(record, key, where);
  if (!v.is_array()) wrong_type(key, where, "a list of strings");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    if (!item.is_string()) wrong_type(key, where, "a list of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace ttsmt
