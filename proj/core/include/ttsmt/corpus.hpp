#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ttsmt/io.hpp"
#include "ttsmt/languages.hpp"

namespace ttsmt {

struct LangPair {
  std::string src;
  std::string tgt;

  /// Parses "en-ja". Throws ValidationError on malformed codes or src == tgt.
  static LangPair parse(std::string_view text);
  std::string str() const { return src + "-" + tgt; }

  friend auto operator<=>(const LangPair&, const LangPair&) = default;
};

struct Segment {
  std::string id;
  LangPair pair;
  std::string domain;
  std::string src;
  std::vector<std::string> refs;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// An ordered, id-unique collection of segments. Immutable once built.
class Dataset {
 public:
  Dataset() = default;
  /// Throws ValidationError on duplicate ids.
  Dataset(std::string name, std::vector<Segment> segments);

  const std::string& name() const { return name_; }
  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }

  const Segment* find(std::string_view id) const;
  /// Throws ValidationError if absent.
  const Segment& at(std::string_view id) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.name_ == b.name_ && a.segments_ == b.segments_;
  }

 private:
  std::string name_;
  std::vector<Segment> segments_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads segments.jsonl. The dataset is named after the file stem. Rejects
/// malformed records (with line number), duplicate ids, language codes missing
/// from `languages`, and empty files.
Dataset load_dataset(const std::filesystem::path& path,
                     const LanguageTable& languages = LanguageTable::defaults());

std::string serialize_dataset(const Dataset& ds);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

json segment_to_json(const Segment& seg);

/// Order-preserving subset; may be empty.
Dataset filter_pair(const Dataset& ds, const LangPair& pair);

}  // namespace ttsmt
