#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ttsmt {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Invokes `fn(line_number, record)` for every non-blank line. Line numbers are
/// 1-based. Parse failures raise ValidationError naming `path:line`.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn);

/// Compact single-line serialization with raw UTF-8 (no \u escapes).
std::string dump_line(const json& record);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// 64-bit FNV-1a rendered as 16 lowercase hex digits.
std::string text_hash(std::string_view text);

// Typed field access with errors that name the field. `where` is prefixed to
// any message, typically "file:line".
std::string get_string(const json& record, std::string_view key, std::string_view where);
std::int64_t get_int(const json& record, std::string_view key, std::string_view where);
double get_number(const json& record, std::string_view key, std::string_view where);
std::optional<double> get_optional_number(const json& record, std::string_view key,
                                          std::string_view where);
std::vector<std::string> get_string_list(const json& record, std::string_view key,
                                         std::string_view where);

/// Splits on `sep`, keeping empty fields.
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace ttsmt
