#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ttsmt::unicode {

/// Decodes UTF-8 into code points. Ill-formed sequences become U+FFFD.
std::u32string decode(std::string_view utf8);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view text);

/// Matches Python's str.isspace(), which is what whitespace splitting in the
/// standard WMT tooling uses.
bool is_space(char32_t cp);

/// Splits on runs of is_space(); no empty pieces.
std::vector<std::u32string> split_whitespace(std::u32string_view text);

/// Full (locale-independent) lowercase mapping, as Python's str.lower().
std::u32string to_lower(std::u32string_view text);

/// General category L* (letters, including ideographs and kana).
bool is_letter(char32_t cp);

/// Unicode Script property long name ("Latin", "Han", "Cyrillic", ...). For
/// Common/Inherited code points with a Script_Extensions value, the first
/// extension script is reported instead.
std::string_view script_name(char32_t cp);

/// Han, Hiragana, Katakana or Hangul: scripts written without inter-word
/// spaces, counted one token per character by the approximate counter.
bool is_cjk(char32_t cp);

}  // namespace ttsmt::unicode
