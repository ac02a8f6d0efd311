#include "ttsmt/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/ustring.h>

namespace ttsmt::unicode {

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(len) > n) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x1C: case 0x1D: case 0x1E: case 0x1F: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::vector<std::u32string> split_whitespace(std::u32string_view text) {
  std::vector<std::u32string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::u32string to_lower(std::u32string_view text) {
  std::u16string utf16;
  utf16.reserve(text.size());
  for (char32_t cp : text) {
    if (cp >= 0x10000) {
      const char32_t v = cp - 0x10000;
      utf16.push_back(static_cast<char16_t>(0xD800 + (v >> 10)));
      utf16.push_back(static_cast<char16_t>(0xDC00 + (v & 0x3FF)));
    } else {
      utf16.push_back(static_cast<char16_t>(cp));
    }
  }
  std::u16string lowered(utf16.size() * 3 + 1, u'\0');
  UErrorCode status = U_ZERO_ERROR;
  const int32_t len = u_strToLower(reinterpret_cast<UChar*>(lowered.data()),
                                   static_cast<int32_t>(lowered.size()),
                                   reinterpret_cast<const UChar*>(utf16.data()),
                                   static_cast<int32_t>(utf16.size()), "", &status);
  if (U_FAILURE(status)) return std::u32string(text);
  std::u32string out;
  out.reserve(static_cast<std::size_t>(len));
  for (int32_t i = 0; i < len; ++i) {
    const char32_t u = lowered[static_cast<std::size_t>(i)];
    if (u >= 0xD800 && u < 0xDC00 && i + 1 < len) {
      const char32_t lo = lowered[static_cast<std::size_t>(++i)];
      out.push_back(0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00));
    } else {
      out.push_back(u);
    }
  }
  return out;
}

bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)) != 0; }

namespace {

UScriptCode resolved_script(char32_t cp) {
  UErrorCode err = U_ZERO_ERROR;
  UScriptCode code = uscript_getScript(static_cast<UChar32>(cp), &err);
  if (U_FAILURE(err)) return USCRIPT_UNKNOWN;
  if (code == USCRIPT_COMMON || code == USCRIPT_INHERITED) {
    UScriptCode ext[8];
    err = U_ZERO_ERROR;
    int32_t count = uscript_getScriptExtensions(static_cast<UChar32>(cp), ext, 8, &err);
    if (U_SUCCESS(err) && count > 0 && ext[0] != USCRIPT_COMMON &&
        ext[0] != USCRIPT_INHERITED) {
      return ext[0];
    }
  }
  return code;
}

}  // namespace

std::string_view script_name(char32_t cp) {
  const char* name = uscript_getName(resolved_script(cp));
  return name ? std::string_view(name) : std::string_view("Unknown");
}

bool is_cjk(char32_t cp) {
  switch (resolved_script(cp)) {
    case USCRIPT_HAN:
    case USCRIPT_HIRAGANA:
    case USCRIPT_KATAKANA:
    case USCRIPT_HANGUL:
      return true;
    default:
      return false;
  }
}

}  // namespace ttsmt::unicode
