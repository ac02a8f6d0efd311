#include "ttsmt/corpus.hpp"

#include "ttsmt/error.hpp"

namespace ttsmt {

LangPair LangPair::parse(std::string_view text) {
  auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw ValidationError("language pair '" + std::string(text) + "' must look like 'en-de'");
  }
  LangPair pair{std::string(text.substr(0, dash)), std::string(text.substr(dash + 1))};
  if (!is_valid_language_code(pair.src) || !is_valid_language_code(pair.tgt)) {
    throw ValidationError("invalid language code in pair '" + std::string(text) + "'");
  }
  if (pair.src == pair.tgt) {
    throw ValidationError("language pair '" + std::string(text) + "' has src == tgt");
  }
  return pair;
}

Dataset::Dataset(std::string name, std::vector<Segment> segments)
    : name_(std::move(name)), segments_(std::move(segments)) {
  index_.reserve(segments_.size());
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    auto [it, inserted] = index_.emplace(segments_[i].id, i);
    if (!inserted) {
      throw ValidationError("duplicate segment id \"" + segments_[i].id + "\"");
    }
  }
}

const Segment* Dataset::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &segments_[it->second];
}

const Segment& Dataset::at(std::string_view id) const {
  const Segment* seg = find(id);
  if (!seg) throw ValidationError("unknown segment id \"" + std::string(id) + "\"");
  return *seg;
}

Dataset load_dataset(const std::filesystem::path& path, const LanguageTable& languages) {
  std::vector<Segment> segments;
  std::unordered_map<std::string, std::size_t> first_seen;
  for_each_jsonl(path, [&](std::size_t line_no, const json& rec) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Segment seg;
    seg.id = get_string(rec, "id", where);
    seg.pair.src = get_string(rec, "src_lang", where);
    seg.pair.tgt = get_string(rec, "tgt_lang", where);
    seg.domain = get_string(rec, "domain", where);
    seg.src = get_string(rec, "src", where);
    seg.refs = get_string_list(rec, "refs", where);

    if (seg.id.empty()) throw ValidationError(where + ": empty \"id\"");
    for (const auto* code : {&seg.pair.src, &seg.pair.tgt}) {
      if (!is_valid_language_code(*code) || !languages.contains(*code)) {
        throw ValidationError(where + ": unknown language code \"" + *code + "\"");
      }
    }
    if (seg.pair.src == seg.pair.tgt) {
      throw ValidationError(where + ": src_lang equals tgt_lang");
    }
    if (seg.src.empty()) throw ValidationError(where + ": empty \"src\"");
    for (const auto& ref : seg.refs) {
      if (ref.empty()) throw ValidationError(where + ": empty entry in \"refs\"");
    }
    auto [it, inserted] = first_seen.emplace(seg.id, line_no);
    if (!inserted) {
      throw ValidationError(where + ": duplicate id \"" + seg.id + "\" (first seen on line " +
                            std::to_string(it->second) + ")");
    }
    segments.push_back(std::move(seg));
  });
  if (segments.empty()) {
    throw ValidationError(path.string() + ": dataset contains no segments");
  }
  return Dataset(path.stem().string(), std::move(segments));
}

json segment_to_json(const Segment& seg) {
  json rec = json::object();
  rec["id"] = seg.id;
  rec["src_lang"] = seg.pair.src;
  rec["tgt_lang"] = seg.pair.tgt;
  rec["domain"] = seg.domain;
  rec["src"] = seg.src;
  rec["refs"] = seg.refs;
  return rec;
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  for (const auto& seg : ds.segments()) {
    out += dump_line(segment_to_json(seg));
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(ds));
}

Dataset filter_pair(const Dataset& ds, const LangPair& pair) {
  std::vector<Segment> kept;
  for (const auto& seg : ds.segments()) {
    if (seg.pair == pair) kept.push_back(seg);
  }
  return Dataset(ds.name(), std::move(kept));
}

}  // namespace ttsmt
