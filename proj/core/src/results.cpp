#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "ttsmt/analysis.hpp"
#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"

namespace ttsmt {

namespace {

constexpr std::string_view kCurveHeader = "model,pair,metric,n,mean,std,draws,tflops_per_seg";

struct Field {
  std::string raw;
  std::string value;
};

std::vector<Field> split_csv_line(std::string_view line, const std::string& where) {
  std::vector<Field> out;
  std::size_t i = 0;
  while (true) {
    Field f;
    const std::size_t start = i;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) throw ValidationError(where + ": unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            f.value += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        f.value += line[i++];
      }
      if (i < line.size() && line[i] != ',') {
        throw ValidationError(where + ": text after closing quote");
      }
    } else {
      while (i < line.size() && line[i] != ',') f.value += line[i++];
    }
    f.raw = std::string(line.substr(start, i - start));
    out.push_back(std::move(f));
    if (i >= line.size()) break;
    ++i;
  }
  return out;
}

std::optional<ReportedValue> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  ReportedValue out{v, 0};
  const auto dot = s.find('.');
  if (s.find_first_of("eE") != std::string_view::npos) {
    out.decimals = -1;
  } else if (dot != std::string_view::npos) {
    out.decimals = static_cast<int>(s.size() - dot - 1);
  }
  return out;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_missing(std::string_view s) { return s.empty() || s == "--" || s == "NA" || s == "-"; }

Orientation orientation_for(std::string_view metric) {
  std::string lower;
  for (char c : metric) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (const MetricId* m = MetricCatalog::defaults().find(lower)) return m->orientation;
  return Orientation::kHigherBetter;
}

std::string cell(const std::string& source, std::size_t line, std::size_t col,
                 const std::string& name) {
  return source + ":" + std::to_string(line) + ": column " + std::to_string(col + 1) + " (" +
         name + ")";
}

ScalingCurve& curve_for(std::vector<ScalingCurve>& curves, std::map<std::string, std::size_t>& index,
                        const std::string& model, const std::string& pair,
                        const std::string& metric) {
  const std::string key = model + '\x1f' + pair + '\x1f' + metric;
  auto it = index.find(key);
  if (it != index.end()) return curves[it->second];
  index.emplace(key, curves.size());
  curves.push_back({model, pair, metric, orientation_for(metric), {}});
  return curves.back();
}

std::string format_scaled(std::int64_t scaled, int decimals) {
  const bool negative = scaled < 0;
  std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(scaled + 1)) + 1
                               : static_cast<std::uint64_t>(scaled);
  std::uint64_t pow10 = 1;
  for (int i = 0; i < decimals; ++i) pow10 *= 10;
  std::string out = negative ? "-" : "+";
  out += std::to_string(mag / pow10);
  if (decimals > 0) {
    std::string frac = std::to_string(mag % pow10);
    out += '.' + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out;
}

}  // namespace

ResultsTable parse_results(std::string_view text, std::string_view source_view) {
  const std::string source(source_view);
  ResultsTable table;
  std::vector<std::string> lines;
  {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string line(text.substr(pos, nl - pos));
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
        table.crlf = true;
      }
      lines.push_back(std::move(line));
      pos = nl + 1;
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ValidationError(source + ": empty results file");

  const auto header_fields = split_csv_line(lines[0], source + ":1");
  for (const auto& f : header_fields) {
    table.header.push_back(f.value);
    table.header_raw.push_back(f.raw);
  }
  if (lines[0] == kCurveHeader) {
    table.schema = ResultsTable::Schema::kCurve;
  } else if (table.header.size() >= 4 && table.header[0] == "model" && table.header[1] == "pair" &&
             table.header[2] == "n") {
    table.schema = ResultsTable::Schema::kWide;
    std::set<std::string> seen;
    for (std::size_t c = 3; c < table.header.size(); ++c) {
      if (table.header[c].empty()) {
        throw ValidationError(source + ":1: column " + std::to_string(c + 1) + " has no metric name");
      }
      if (!seen.insert(table.header[c]).second) {
        throw ValidationError(source + ":1: duplicate metric column '" + table.header[c] + "'");
      }
    }
  } else {
    throw ValidationError(source + ":1: unrecognized header; expected '" + std::string(kCurveHeader) +
                          "' or 'model,pair,n,<metric>...'");
  }

  std::map<std::string, std::size_t> index;
  std::set<std::string> keys;
  auto& curves = table.report.curves;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto fields = split_csv_line(lines[li], where);
    if (fields.size() != table.header.size()) {
      throw ValidationError(where + ": expected " + std::to_string(table.header.size()) +
                            " columns, got " + std::to_string(fields.size()));
    }
    std::vector<std::string> raw;
    for (const auto& f : fields) raw.push_back(f.raw);
    table.rows.push_back(std::move(raw));

    const std::string& model = fields[0].value;
    const std::string& pair = fields[1].value;
    if (model.empty()) throw ValidationError(cell(source, line_no, 0, "model") + ": empty");
    if (table.schema == ResultsTable::Schema::kCurve) {
      CurveRow row;
      const auto n = parse_int(fields[3].value);
      if (!n || *n < 1) {
        throw ValidationError(cell(source, line_no, 3, "n") + ": expected a positive integer, got '" +
                              fields[3].value + "'");
      }
      row.n = *n;
      const auto mean = parse_decimal(fields[4].value);
      if (!mean) {
        throw ValidationError(cell(source, line_no, 4, "mean") + ": expected a number, got '" +
                              fields[4].value + "'");
      }
      row.mean = *mean;
      const auto sd = parse_decimal(fields[5].value);
      if (!sd || sd->value < 0) {
        throw ValidationError(cell(source, line_no, 5, "std") + ": expected a non-negative number");
      }
      row.std = sd->value;
      const auto draws = parse_int(fields[6].value);
      if (!draws || *draws < 0) {
        throw ValidationError(cell(source, line_no, 6, "draws") + ": expected an integer");
      }
      row.draws = *draws;
      if (!fields[7].value.empty()) {
        const auto tf = parse_decimal(fields[7].value);
        if (!tf) throw ValidationError(cell(source, line_no, 7, "tflops_per_seg") + ": expected a number");
        row.tflops_per_seg = tf->value;
      }
      const std::string key = model + '\x1f' + pair + '\x1f' + fields[2].value + '\x1f' +
                              std::to_string(row.n);
      if (!keys.insert(key).second) {
        throw ValidationError(where + ": duplicate row for " + model + " " + pair + " " +
                              fields[2].value + " N=" + std::to_string(row.n));
      }
      curve_for(curves, index, model, pair, fields[2].value).rows.push_back(row);
    } else {
      std::int64_t n = 0;
      if (!is_missing(fields[2].value)) {
        const auto parsed = parse_int(fields[2].value);
        if (!parsed || *parsed < 1) {
          throw ValidationError(cell(source, line_no, 2, "n") +
                                ": expected a positive integer or '--', got '" + fields[2].value + "'");
        }
        n = *parsed;
      }
      const std::string key = model + '\x1f' + pair + '\x1f' + std::to_string(n);
      if (!keys.insert(key).second) {
        throw ValidationError(where + ": duplicate row for " + model + " " + pair + " N=" +
                              std::to_string(n));
      }
      for (std::size_t c = 3; c < fields.size(); ++c) {
        if (is_missing(fields[c].value)) continue;
        const auto v = parse_decimal(fields[c].value);
        if (!v) {
          throw ValidationError(cell(source, line_no, c, table.header[c]) +
                                ": expected a number, got '" + fields[c].value + "'");
        }
        CurveRow row;
        row.n = n;
        row.mean = *v;
        curve_for(curves, index, model, pair, table.header[c]).rows.push_back(row);
      }
    }
  }
  table.report.crossovers = find_crossovers(curves);
  return table;
}

ResultsTable ingest_results(const std::filesystem::path& path) {
  return parse_results(read_file(path), path.string());
}

std::string export_results(const ResultsTable& table) {
  const std::string eol = table.crlf ? "\r\n" : "\n";
  auto join = [](const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) line += ',';
      line += fields[i];
    }
    return line;
  };
  std::string out = join(table.header_raw) + eol;
  for (const auto& row : table.rows) out += join(row) + eol;
  return out;
}

std::string Delta::rendered() const {
  const int d = std::max(from.decimals, to.decimals);
  if (from.decimals < 0 || to.decimals < 0 || d > 15) {
    const double diff = to.value - from.value;
    return (diff >= 0 ? "+" : "") + format_double(diff);
  }
  const double scale = std::pow(10.0, d);
  const auto a = static_cast<std::int64_t>(std::llround(from.value * scale));
  const auto b = static_cast<std::int64_t>(std::llround(to.value * scale));
  return format_scaled(b - a, d);
}

std::vector<Delta> compute_deltas(const ScalingReport& report, std::int64_t n_from,
                                  std::int64_t n_to) {
  std::vector<Delta> out;
  for (const auto& c : report.curves) {
    const CurveRow* a = c.at_n(n_from);
    const CurveRow* b = c.at_n(n_to);
    if (!a || !b) continue;
    out.push_back({c.model, c.pair, c.metric, n_from, n_to, a->mean, b->mean});
  }
  return out;
}

std::string render_deltas(const std::vector<Delta>& deltas) {
  std::string out = "model,pair,metric,from_n,to_n,from,to,delta\n";
  for (const auto& d : deltas) {
    out += d.model + ',' + d.pair + ',' + d.metric + ',' + std::to_string(d.n_from) + ',' +
           std::to_string(d.n_to) + ',' + format_reported(d.from) + ',' + format_reported(d.to) +
           ',' + d.rendered() + '\n';
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, double>> flatten(const ScalingReport& r) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& c : r.curves) {
    for (const auto& row : c.rows) {
      out.emplace_back(c.model + "|" + c.pair + "|" + c.metric + "|" + std::to_string(row.n),
                       row.mean.value);
    }
  }
  return out;
}

}  // namespace

std::vector<DiffLine> diff_reports(const ScalingReport& ours, const ScalingReport& theirs,
                                   double tolerance) {
  const auto a = flatten(ours);
  const auto b = flatten(theirs);
  std::map<std::string, double> theirs_map(b.begin(), b.end());
  std::set<std::string> ours_keys;
  std::vector<DiffLine> out;
  for (const auto& [key, v] : a) {
    ours_keys.insert(key);
    auto it = theirs_map.find(key);
    if (it == theirs_map.end()) {
      out.push_back({key, v, std::nullopt});
    } else if (std::abs(v - it->second) > tolerance) {
      out.push_back({key, v, it->second});
    }
  }
  for (const auto& [key, v] : b) {
    if (!ours_keys.count(key)) out.push_back({key, std::nullopt, v});
  }
  return out;
}

std::string render_diff(const std::vector<DiffLine>& lines) {
  std::string out = "key,ours,theirs,delta\n";
  for (const auto& l : lines) {
    out += l.key + ',' + (l.ours ? format_double(*l.ours) : "NA") + ',' +
           (l.theirs ? format_double(*l.theirs) : "NA") + ',' +
           (l.ours && l.theirs ? format_double(*l.ours - *l.theirs) : "NA") + '\n';
  }
  return out;
}

ScalingReport load_report_any(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    const std::string text = read_file(path);
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
    return report_from_json(doc);
  }
  return ingest_results(path).report;
}

}  // namespace ttsmt
