#include "ttsmt/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <unordered_map>

#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/parallel.hpp"
#include "ttsmt/unicode.hpp"

namespace ttsmt {

namespace {

using NgramCounts = std::unordered_map<std::u32string, std::int64_t>;

std::u32string rstrip(std::u32string s) {
  while (!s.empty() && unicode::is_space(s.back())) s.pop_back();
  return s;
}

void replace_all(std::u32string& s, std::u32string_view from, std::u32string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::u32string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_dot_comma(char32_t c) { return c == U'.' || c == U','; }

// Characters split off unconditionally by the 13a post-tokenizer: ASCII
// punctuation except ' - . ,
bool is_13a_symbol(char32_t c) {
  return (c >= U'{' && c <= U'~') || (c >= U'[' && c <= U'`') || (c >= U' ' && c <= U'&') ||
         (c >= U'(' && c <= U'+') || (c >= U':' && c <= U'@') || c == U'/';
}

// The regex pass of the 13a tokenizer, one rule at a time with the same
// left-to-right non-overlapping match semantics.
std::u32string tokenize_13a_u32(std::u32string line) {
  replace_all(line, U"<skipped>", U"");
  replace_all(line, U"-\n", U"");
  replace_all(line, U"\n", U" ");
  if (line.find(U'&') != std::u32string::npos) {
    replace_all(line, U"&quot;", U"\"");
    replace_all(line, U"&amp;", U"&");
    replace_all(line, U"&lt;", U"<");
    replace_all(line, U"&gt;", U">");
  }
  std::u32string s = U" " + line + U" ";

  std::u32string a;
  a.reserve(s.size() * 2);
  for (char32_t c : s) {
    if (is_13a_symbol(c)) {
      a += U' ';
      a += c;
      a += U' ';
    } else {
      a += c;
    }
  }

  std::u32string b;
  b.reserve(a.size() * 2);
  for (std::size_t i = 0; i < a.size();) {
    if (i + 1 < a.size() && !is_digit(a[i]) && is_dot_comma(a[i + 1])) {
      b += a[i];
      b += U' ';
      b += a[i + 1];
      b += U' ';
      i += 2;
    } else {
      b += a[i++];
    }
  }

  std::u32string c;
  c.reserve(b.size() * 2);
  for (std::size_t i = 0; i < b.size();) {
    if (i + 1 < b.size() && is_dot_comma(b[i]) && !is_digit(b[i + 1])) {
      c += U' ';
      c += b[i];
      c += U' ';
      c += b[i + 1];
      i += 2;
    } else {
      c += b[i++];
    }
  }

  std::u32string d;
  d.reserve(c.size() * 2);
  for (std::size_t i = 0; i < c.size();) {
    if (i + 1 < c.size() && is_digit(c[i]) && c[i + 1] == U'-') {
      d += c[i];
      d += U" - ";
      i += 2;
    } else {
      d += c[i++];
    }
  }

  std::u32string out;
  for (const auto& tok : unicode::split_whitespace(d)) {
    if (!out.empty()) out += U' ';
    out += tok;
  }
  return out;
}

std::u32string tokenize_char_u32(std::u32string_view line) {
  std::u32string out;
  out.reserve(line.size() * 2);
  for (char32_t c : line) {
    if (!out.empty()) out += U' ';
    out += c;
  }
  return out;
}

std::vector<std::u32string> bleu_tokens(std::string_view text, const BleuConfig& cfg) {
  std::u32string s = unicode::decode(text);
  if (!cfg.case_sensitive) s = unicode::to_lower(s);
  s = rstrip(std::move(s));
  s = cfg.tokenizer == BleuTokenizer::k13a ? tokenize_13a_u32(std::move(s)) : tokenize_char_u32(s);
  return unicode::split_whitespace(s);
}

std::u32string join_tokens(const std::vector<std::u32string>& toks, std::size_t first,
                           std::size_t n) {
  std::u32string key;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) key += U' ';
    key += toks[first + k];
  }
  return key;
}

/// All word n-grams of orders 1..max_order in one table.
NgramCounts word_ngrams(const std::vector<std::u32string>& toks, std::size_t max_order) {
  NgramCounts counts;
  for (std::size_t n = 1; n <= max_order; ++n) {
    for (std::size_t i = 0; i + n <= toks.size(); ++i) ++counts[join_tokens(toks, i, n)];
  }
  return counts;
}

std::size_t key_order(const std::u32string& key) {
  return 1 + static_cast<std::size_t>(std::count(key.begin(), key.end(), U' '));
}

double my_log(double x) { return x == 0.0 ? -9999999999.0 : std::log(x); }

// chrF helpers ---------------------------------------------------------------

bool is_ascii_punct(char32_t c) {
  return (c >= U'!' && c <= U'/') || (c >= U':' && c <= U'@') || (c >= U'[' && c <= U'`') ||
         (c >= U'{' && c <= U'~');
}

std::vector<std::u32string> remove_punctuation(std::u32string_view sent) {
  std::vector<std::u32string> out;
  for (auto& w : unicode::split_whitespace(sent)) {
    if (w.size() == 1) {
      out.push_back(std::move(w));
    } else if (is_ascii_punct(w.back())) {
      out.push_back(w.substr(0, w.size() - 1));
      out.push_back(w.substr(w.size() - 1));
    } else if (is_ascii_punct(w.front())) {
      out.push_back(w.substr(0, 1));
      out.push_back(w.substr(1));
    } else {
      out.push_back(std::move(w));
    }
  }
  return out;
}

/// One counter per order: char orders first, then word orders.
std::vector<NgramCounts> chrf_ngrams(std::string_view text, const ChrfConfig& cfg) {
  std::u32string s = unicode::decode(text);
  if (!cfg.case_sensitive) s = unicode::to_lower(s);
  std::u32string packed;
  for (const auto& w : unicode::split_whitespace(s)) packed += w;
  std::vector<NgramCounts> out;
  for (std::int64_t n = 1; n <= cfg.char_order; ++n) {
    NgramCounts c;
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= packed.size(); ++i) ++c[packed.substr(i, un)];
    out.push_back(std::move(c));
  }
  if (cfg.word_order > 0) {
    const auto words = remove_punctuation(s);
    for (std::int64_t n = 1; n <= cfg.word_order; ++n) {
      NgramCounts c;
      const auto un = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i + un <= words.size(); ++i) ++c[join_tokens(words, i, un)];
      out.push_back(std::move(c));
    }
  }
  return out;
}

void check_corpus(std::size_t n_hyps, std::span<const std::vector<std::string>> refs) {
  if (n_hyps != refs.size()) {
    throw ValidationError("corpus has " + std::to_string(n_hyps) + " hypotheses but " +
                          std::to_string(refs.size()) + " reference lists");
  }
  if (n_hyps == 0) throw ValidationError("empty corpus");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].empty()) {
      throw ValidationError("segment " + std::to_string(i) + " has no references");
    }
  }
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string_view to_string(BleuTokenizer tok) { return tok == BleuTokenizer::k13a ? "13a" : "char"; }

BleuTokenizer parse_bleu_tokenizer(std::string_view text) {
  if (text == "13a") return BleuTokenizer::k13a;
  if (text == "char") return BleuTokenizer::kChar;
  throw ConfigError("unknown BLEU tokenizer '" + std::string(text) + "' (expected 13a or char)");
}

BleuTokenizer default_tokenizer(std::string_view tgt_lang) {
  return tgt_lang == "zh" || tgt_lang == "ja" ? BleuTokenizer::kChar : BleuTokenizer::k13a;
}

void BleuConfig::validate() const {
  if (max_ngram < 1) throw ConfigError("BLEU max_ngram must be >= 1");
  if (!(smooth_value >= 0.0)) throw ConfigError("BLEU smoothing value must be >= 0");
}

void ChrfConfig::validate() const {
  if (char_order < 1 || word_order < 0) {
    throw ConfigError("chrF needs char_order >= 1 and word_order >= 0");
  }
  if (!(beta > 0.0)) throw ConfigError("chrF beta must be positive");
}

std::string tokenize_13a(std::string_view line) {
  return unicode::encode(tokenize_13a_u32(unicode::decode(line)));
}

std::string tokenize_char(std::string_view line) {
  return unicode::encode(tokenize_char_u32(unicode::decode(line)));
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  sys_len += o.sys_len;
  ref_len += o.ref_len;
  if (correct.size() < o.correct.size()) correct.resize(o.correct.size(), 0);
  if (total.size() < o.total.size()) total.resize(o.total.size(), 0);
  for (std::size_t i = 0; i < o.correct.size(); ++i) correct[i] += o.correct[i];
  for (std::size_t i = 0; i < o.total.size(); ++i) total[i] += o.total[i];
  return *this;
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& o) {
  if (counts.size() < o.counts.size()) counts.resize(o.counts.size(), 0);
  for (std::size_t i = 0; i < o.counts.size(); ++i) counts[i] += o.counts[i];
  return *this;
}

BleuStats bleu_segment_stats(std::string_view hyp, std::span<const std::string> refs,
                             const BleuConfig& cfg) {
  if (refs.empty()) throw ValidationError("BLEU needs at least one reference");
  const auto order = static_cast<std::size_t>(cfg.max_ngram);
  NgramCounts ref_counts;
  std::vector<std::int64_t> ref_lens;
  for (const auto& ref : refs) {
    const auto toks = bleu_tokens(ref, cfg);
    ref_lens.push_back(static_cast<std::int64_t>(toks.size()));
    for (auto& [key, count] : word_ngrams(toks, order)) {
      auto& slot = ref_counts[key];
      slot = std::max(slot, count);
    }
  }
  const auto htoks = bleu_tokens(hyp, cfg);
  BleuStats st;
  st.sys_len = static_cast<std::int64_t>(htoks.size());
  std::int64_t closest_diff = -1;
  std::int64_t closest_len = -1;
  for (std::int64_t len : ref_lens) {
    const std::int64_t diff = std::abs(st.sys_len - len);
    if (closest_diff == -1 || diff < closest_diff) {
      closest_diff = diff;
      closest_len = len;
    } else if (diff == closest_diff && len < closest_len) {
      closest_len = len;
    }
  }
  st.ref_len = closest_len;
  st.correct.assign(order, 0);
  st.total.assign(order, 0);
  for (const auto& [key, count] : word_ngrams(htoks, order)) {
    const std::size_t n = key_order(key) - 1;
    st.total[n] += count;
    auto it = ref_counts.find(key);
    if (it != ref_counts.end()) st.correct[n] += std::min(count, it->second);
  }
  return st;
}

double bleu_from_stats(const BleuStats& stats, const BleuConfig& cfg) {
  const auto order = static_cast<std::size_t>(cfg.max_ngram);
  if (stats.correct.size() != order || stats.total.size() != order) {
    throw ValidationError("BLEU statistics do not match max_ngram");
  }
  double bp = 1.0;
  if (stats.sys_len < stats.ref_len) {
    bp = stats.sys_len > 0
             ? std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.sys_len))
             : 0.0;
  }
  if (std::all_of(stats.correct.begin(), stats.correct.end(), [](std::int64_t c) { return c == 0; })) {
    return 0.0;
  }
  std::vector<double> precisions(order, 0.0);
  for (std::size_t n = 1; n <= order; ++n) {
    double correct = static_cast<double>(stats.correct[n - 1]);
    double total = static_cast<double>(stats.total[n - 1]);
    if (cfg.smoothing == BleuConfig::Smoothing::kAddK && n > 1) {
      correct += cfg.smooth_value;
      total += cfg.smooth_value;
    }
    if (total == 0.0) break;
    if (correct != 0.0) precisions[n - 1] = 100.0 * correct / total;
  }
  double log_sum = 0.0;
  for (double p : precisions) log_sum += my_log(p);
  return bp * std::exp(log_sum / static_cast<double>(order));
}

namespace {

double chrf_f(const std::vector<std::int64_t>& st, double beta) {
  constexpr double eps = 1e-16;
  const double factor = beta * beta;
  double avg_prec = 0.0;
  double avg_rec = 0.0;
  int effective = 0;
  for (std::size_t i = 0; i < st.size() / 3; ++i) {
    const auto n_hyp = static_cast<double>(st[3 * i]);
    const auto n_ref = static_cast<double>(st[3 * i + 1]);
    const auto n_match = static_cast<double>(st[3 * i + 2]);
    const double prec = n_hyp > 0 ? n_match / n_hyp : eps;
    const double rec = n_ref > 0 ? n_match / n_ref : eps;
    if (n_hyp > 0 && n_ref > 0) {
      avg_prec += prec;
      avg_rec += rec;
      ++effective;
    }
  }
  if (effective == 0) {
    avg_prec = avg_rec = 0.0;
  } else {
    avg_prec /= effective;
    avg_rec /= effective;
  }
  if (avg_prec + avg_rec != 0.0) {
    return 100.0 * (1 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
  }
  return 0.0;
}

}  // namespace

ChrfStats chrf_segment_stats(std::string_view hyp, std::span<const std::string> refs,
                             const ChrfConfig& cfg) {
  if (refs.empty()) throw ValidationError("chrF needs at least one reference");
  const auto hyp_ngrams = chrf_ngrams(hyp, cfg);
  ChrfStats best;
  double best_f = -1.0;
  for (const auto& ref : refs) {
    const auto ref_ngrams = chrf_ngrams(ref, cfg);
    std::vector<std::int64_t> st;
    st.reserve(3 * hyp_ngrams.size());
    for (std::size_t o = 0; o < hyp_ngrams.size(); ++o) {
      std::int64_t match = 0;
      std::int64_t hyp_count = 0;
      std::int64_t ref_count = 0;
      for (const auto& [key, count] : hyp_ngrams[o]) {
        hyp_count += count;
        auto it = ref_ngrams[o].find(key);
        if (it != ref_ngrams[o].end()) match += std::min(count, it->second);
      }
      for (const auto& [key, count] : ref_ngrams[o]) ref_count += count;
      st.push_back(ref_ngrams[o].empty() ? 0 : hyp_count);
      st.push_back(ref_count);
      st.push_back(match);
    }
    const double f = chrf_f(st, cfg.beta);
    if (f > best_f) {
      best_f = f;
      best.counts = std::move(st);
    }
  }
  return best;
}

double chrf_from_stats(const ChrfStats& stats, const ChrfConfig& cfg) {
  if (stats.counts.size() != static_cast<std::size_t>(3 * (cfg.char_order + cfg.word_order))) {
    throw ValidationError("chrF statistics do not match the configured orders");
  }
  return chrf_f(stats.counts, cfg.beta);
}

double bleu_corpus(std::span<const std::string> hyps,
                   std::span<const std::vector<std::string>> refs, const BleuConfig& cfg) {
  cfg.validate();
  check_corpus(hyps.size(), refs);
  std::vector<BleuStats> per(hyps.size());
  parallel_for(hyps.size(), [&](std::size_t i) { per[i] = bleu_segment_stats(hyps[i], refs[i], cfg); });
  BleuStats total;
  for (const auto& s : per) total += s;
  return bleu_from_stats(total, cfg);
}

double chrfpp_corpus(std::span<const std::string> hyps,
                     std::span<const std::vector<std::string>> refs, const ChrfConfig& cfg) {
  cfg.validate();
  check_corpus(hyps.size(), refs);
  std::vector<ChrfStats> per(hyps.size());
  parallel_for(hyps.size(), [&](std::size_t i) { per[i] = chrf_segment_stats(hyps[i], refs[i], cfg); });
  ChrfStats total;
  for (const auto& s : per) total += s;
  return chrf_from_stats(total, cfg);
}

std::string bleu_signature(const BleuConfig& cfg, std::size_t n_refs) {
  std::string smooth = cfg.smoothing == BleuConfig::Smoothing::kNone
                           ? "none"
                           : "add-k[" + fixed2(cfg.smooth_value) + "]";
  return "nrefs:" + std::to_string(n_refs) + "|case:" + (cfg.case_sensitive ? "mixed" : "lc") +
         "|eff:no|tok:" + std::string(to_string(cfg.tokenizer)) + "|smooth:" + smooth +
         "|ngram:" + std::to_string(cfg.max_ngram);
}

std::string chrf_signature(const ChrfConfig& cfg, std::size_t n_refs) {
  return "nrefs:" + std::to_string(n_refs) + "|case:" + (cfg.case_sensitive ? "mixed" : "lc") +
         "|eff:yes|nc:" + std::to_string(cfg.char_order) + "|nw:" + std::to_string(cfg.word_order) +
         "|space:no|beta:" + format_double(cfg.beta);
}

CorpusMetric CorpusMetric::resolve(std::string_view name, std::string_view tgt_lang) {
  CorpusMetric m;
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  if (key == "bleu") {
    m.kind = Kind::kBleu;
    m.bleu.tokenizer = default_tokenizer(tgt_lang);
  } else if (key == "chrf++" || key == "chrfpp") {
    m.kind = Kind::kChrf;
  } else {
    throw ConfigError("unknown corpus metric '" + std::string(name) + "' (expected bleu or chrf++)");
  }
  return m;
}

std::string CorpusMetric::signature(std::size_t n_refs) const {
  return kind == Kind::kBleu ? bleu_signature(bleu, n_refs) : chrf_signature(chrf, n_refs);
}

double CorpusMetric::corpus(std::span<const std::string> hyps,
                            std::span<const std::vector<std::string>> refs) const {
  return kind == Kind::kBleu ? bleu_corpus(hyps, refs, bleu) : chrfpp_corpus(hyps, refs, chrf);
}

std::vector<CurvePoint> curve_eval_corpus(const DrawTable& table,
                                          std::span<const CandidatePool* const> pools,
                                          std::span<const Segment* const> segments,
                                          const CorpusMetric& metric, const MetricId& id) {
  const std::size_t n_seg = table.seg_ids.size();
  if (pools.size() != n_seg || segments.size() != n_seg) {
    throw ValidationError("corpus metric needs a pool and a segment for every selected segment");
  }
  for (std::size_t s = 0; s < n_seg; ++s) {
    if (!pools[s] || !segments[s] || pools[s]->seg_id != table.seg_ids[s] ||
        segments[s]->id != table.seg_ids[s]) {
      throw ValidationError("missing pool or segment for selection \"" + table.seg_ids[s] + "\"");
    }
    if (segments[s]->refs.empty()) {
      throw ValidationError("segment \"" + table.seg_ids[s] + "\" has no references for " +
                            metric.name());
    }
  }
  if (metric.kind == CorpusMetric::Kind::kBleu) {
    metric.bleu.validate();
  } else {
    metric.chrf.validate();
  }

  // Corpus statistics are additive over segments, so each distinct selected
  // candidate is scored once and every draw is a sum of cached statistics.
  std::vector<std::map<std::int64_t, std::size_t>> slot(n_seg);
  for (const auto& per_n : table.chosen) {
    for (const auto& per_draw : per_n) {
      if (per_draw.size() != n_seg) throw ValidationError("draw table is missing segments");
      for (std::size_t s = 0; s < n_seg; ++s) {
        const std::int64_t idx = per_draw[s];
        if (idx < 0 || static_cast<std::size_t>(idx) >= pools[s]->size()) {
          throw ValidationError("selection " + std::to_string(idx) + " outside pool \"" +
                                table.seg_ids[s] + "\"");
        }
        slot[s].emplace(idx, 0);
      }
    }
  }
  std::vector<std::vector<BleuStats>> bleu_cache(n_seg);
  std::vector<std::vector<ChrfStats>> chrf_cache(n_seg);
  parallel_for(n_seg, [&](std::size_t s) {
    const auto& refs = segments[s]->refs;
    for (auto& [idx, pos] : slot[s]) {
      const std::string& text = pools[s]->candidates[static_cast<std::size_t>(idx)].text;
      if (metric.kind == CorpusMetric::Kind::kBleu) {
        pos = bleu_cache[s].size();
        bleu_cache[s].push_back(bleu_segment_stats(text, refs, metric.bleu));
      } else {
        pos = chrf_cache[s].size();
        chrf_cache[s].push_back(chrf_segment_stats(text, refs, metric.chrf));
      }
    }
  });

  std::vector<CurvePoint> out;
  for (std::size_t ni = 0; ni < table.schedule.size(); ++ni) {
    std::vector<double> q;
    for (const auto& per_draw : table.chosen[ni]) {
      if (metric.kind == CorpusMetric::Kind::kBleu) {
        BleuStats total;
        for (std::size_t s = 0; s < n_seg; ++s) total += bleu_cache[s][slot[s].at(per_draw[s])];
        q.push_back(bleu_from_stats(total, metric.bleu));
      } else {
        ChrfStats total;
        for (std::size_t s = 0; s < n_seg; ++s) total += chrf_cache[s][slot[s].at(per_draw[s])];
        q.push_back(chrf_from_stats(total, metric.chrf));
      }
    }
    CurvePoint p;
    p.n = table.schedule[ni];
    p.metric = id;
    p.n_draws = static_cast<std::int64_t>(q.size());
    p.mean = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
    double var = 0.0;
    for (double v : q) var += (v - p.mean) * (v - p.mean);
    p.std = std::sqrt(var / static_cast<double>(q.size()));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ttsmt
