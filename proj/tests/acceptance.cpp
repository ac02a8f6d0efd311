// Prints one PASS/FAIL line per end-to-end check; exit status 1 if any fails.

#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "support.hpp"
#include "ttsmt/analysis.hpp"
#include "ttsmt/codeswitch.hpp"
#include "ttsmt/compute.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/parallel.hpp"
#include "ttsmt/selection.hpp"
#include "ttsmt/sim_scorer.hpp"
#include "ttsmt/simulator.hpp"
#include "ttsmt/textmetrics.hpp"
#include "ttsmt_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace ttsmt;
using boost::multiprecision::cpp_int;
using ttsmt::testing::fixture;
using ttsmt::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<const ScoreSet*> ptrs(const std::vector<ScoreSet>& v) {
  std::vector<const ScoreSet*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

Outcome estimator_vs_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ttsmt::testing::RandomPools rp(50, 16, 2024);
  const auto sel = rp.sel_ptrs(), ev = rp.eval_ptrs();
  const std::vector<std::int64_t> schedule = {1, 2, 4, 8, 16};
  const auto curve = subsample_curve(sel, ev, DrawPlan{schedule, 20000, 11, false});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double worst = 0.0;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    double exact = 0.0;
    for (std::size_t s = 0; s < sel.size(); ++s) exact += expected_bon_exact(*sel[s], *ev[s], schedule[j]);
    exact /= static_cast<double>(sel.size());
    const double se = curve[j].standard_error();
    const double gap = std::fabs(curve[j].mean - exact);
    worst = std::max(worst, se > 0 ? gap / se : (gap > 1e-12 ? INFINITY : 0.0));
    o.check(gap <= 3.0 * se + 1e-12,
            "N=" + std::to_string(schedule[j]) + fmt(" estimate %.6f vs exact %.6f", curve[j].mean, exact));
  }
  o.check(secs < 60.0, fmt("runtime %.1f s", secs));
  if (o.pass) o.detail = fmt("worst %.2f SE, %.2f s", worst, secs);
  return o;
}

Outcome order_statistics_law() {
  Outcome o;
  constexpr int kSegments = 4000, kPool = 64, kDraws = 25;
  std::vector<Segment> segs;
  for (int i = 0; i < kSegments; ++i) {
    segs.push_back({"u-" + std::to_string(i), LangPair::parse("en-de"), "sim", "Hello there.", {"Hallo."}});
  }
  DecodeConfig d;
  d.n_cand = kPool;
  d.seed = 42;
  std::vector<CandidatePool> pools(segs.size());
  parallel_for(segs.size(), [&](std::size_t i) { pools[i] = simulate_candidates(segs[i], d, QualityLaw::uniform()); });
  const auto& cat = MetricCatalog::defaults();
  std::vector<ScoreSet> sel(segs.size()), ev(segs.size());
  parallel_for(segs.size(), [&](std::size_t i) {
    SimulatedScorer perfect(NoiseModel::none(), 42);
    sel[i] = score_pool(pools[i], segs[i], cat.resolve("kiwi22-sim"), perfect);
    ev[i] = score_pool(pools[i], segs[i], cat.resolve("sim-oracle"), perfect);
  });
  const std::vector<std::int64_t> schedule = {1, 2, 4, 8, 16, 32};
  const auto curve = subsample_curve(ptrs(sel), ptrs(ev), DrawPlan{schedule, kDraws, 9, false});
  std::string values;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const double n = static_cast<double>(schedule[j]);
    const double want = n / (n + 1.0);
    o.check(std::fabs(curve[j].mean - want) <= 0.01, fmt("N=%.0f: %.4f vs %.4f", n, curve[j].mean, want));
    values += fmt(" %.0f:%.4f", n, curve[j].mean);
  }
  if (o.pass) o.detail = std::to_string(kSegments * kDraws) + " segment-draws," + values;
  return o;
}

Outcome hypergeometric_mass() {
  Outcome o;
  constexpr int kMax = 2048;
  // prefix[r] holds sum_{j < m} C(j, r) while row m of Pascal's triangle is current.
  std::vector<cpp_int> row{1}, prefix(kMax + 1, 0);
  std::int64_t checked = 0;
  for (int m = 0; m <= kMax && o.pass; ++m) {
    if (m >= 1) {
      for (int n = 1; n <= m; ++n) {
        // sum_{k=1}^{m-n+1} C(m-k, n-1) = sum_{j=n-1}^{m-1} C(j, n-1)
        o.check(prefix[n - 1] == row[n], "M=" + std::to_string(m) + " N=" + std::to_string(n));
        ++checked;
      }
    }
    for (int r = 0; r <= m; ++r) prefix[r] += row[r];
    std::vector<cpp_int> next(row.size() + 1);
    next[0] = 1;
    next.back() = 1;
    for (std::size_t r = 1; r < row.size(); ++r) next[r] = row[r - 1] + row[r];
    row = std::move(next);
  }
  // The floating-point probabilities used by the estimator agree with the exact ones.
  double worst = 0.0;
  for (int m : {1, 2, 3, 17, 64, 200, 1000, 2048}) {
    for (int n : {1, 2, m / 3 + 1, m / 2 + 1, m}) {
      if (n > m) continue;
      const auto p = argmax_rank_probabilities(m, n);
      worst = std::max(worst, std::fabs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    }
  }
  o.check(worst < 1e-9, fmt("floating mass off by %.3g", worst));
  if (o.pass) o.detail = std::to_string(checked) + " (M, N) pairs exact; float mass within " + fmt("%.1g", worst);
  return o;
}

Outcome flops_fixtures() {
  Outcome o;
  ModelSpec dec{"toy-dec", ModelFamily::kDecoderSwiglu, 2, 4, 8, std::nullopt};
  ModelSpec enc{"toy-enc", ModelFamily::kEncoderGelu, 2, 4, 8, std::nullopt};
  auto usage = [](std::int64_t n) {
    UsageProfile u;
    u.prompt_tokens = 10;
    u.gen_tokens = 5;
    u.qe_tokens = 7;
    u.n_cand = n;
    return u;
  };
  o.check(gen_cost(dec, usage(2)) == 12800.0, fmt("gen_cost %.1f", gen_cost(dec, usage(2))));
  o.check(qe_cost(enc, usage(3)) == 10752.0, fmt("qe_cost %.1f", qe_cost(enc, usage(3))));
  const double total = total_cost(dec, &enc, usage(2)).c_total;
  o.check(total == 19968.0, fmt("c_total %.1f", total));
  const auto c = [&](std::int64_t n) { return total_cost(dec, &enc, usage(n)).c_total; };
  o.check(c(3) - 2 * c(2) + c(1) == 0.0, "c_total not collinear over N=1,2,3");
  o.check((c(8) - c(1)) * 1023.0 - (c(1024) - c(1)) * 7.0 == 0.0, "c_total not collinear over N=1,8,1024");
  ModelSpec big{"p14e9", ModelFamily::kDecoderSwiglu, 48, 5120, 13824, 14'000'000'000};
  const double gb = memory_estimate(big, 2.0).gigabytes();
  o.check(gb == 28.0, fmt("memory %.3f GB", gb));
  if (o.pass) o.detail = "12800 10752 19968, affine in N, 28 GB";
  return o;
}

// Mean eval of the selection argmax over every size-n subset of the pool.
double enumerate_bon(const std::vector<double>& sel, const std::vector<double>& ev, int n) {
  const int m = static_cast<int>(sel.size());
  double sum = 0.0;
  int count = 0;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    int best = -1;
    for (int i = 0; i < m; ++i) {
      if ((mask >> i & 1u) && (best < 0 || sel[i] > sel[best])) best = i;
    }
    sum += ev[best];
    ++count;
  }
  return sum / count;
}

Outcome interference() {
  Outcome o;
  InterferenceConfig cfg;
  cfg.law = QualityLaw::uniform();
  cfg.selection_noise = NoiseModel::gaussian(0.1);
  cfg.seed = 3;
  const auto curves = interference_study(cfg);
  const InterferenceCurve& same = curves[0];
  const InterferenceCurve& indep = curves[1];
  for (std::size_t j = 0; j < same.points.size(); ++j) {
    const auto n = same.points[j].n;
    if (n >= 2) {
      o.check(same.points[j].mean >= indep.points[j].mean,
              "N=" + std::to_string(n) + fmt(" same %.4f < independent %.4f", same.points[j].mean, indep.points[j].mean));
    }
    o.check(std::fabs(indep.points[j].mean - 0.5) <= 0.01,
            "N=" + std::to_string(n) + fmt(" independent %.4f", indep.points[j].mean));
  }

  // Enumeration: the exact kernel against every subset, ties included.
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 0.1);
  double worst = 0.0;
  for (int m = 1; m <= 8; ++m) {
    for (int t = 0; t < 50; ++t) {
      std::vector<double> s(m), e(m);
      for (int i = 0; i < m; ++i) {
        s[i] = t % 3 == 0 ? std::floor(u(eng) * 3) : u(eng);
        e[i] = u(eng);
      }
      const ScoreSet ss = ttsmt::testing::make_set("p", ttsmt::testing::qe_metric(), s);
      const ScoreSet es = ttsmt::testing::make_set("p", ttsmt::testing::ref_metric(), e);
      for (int n = 1; n <= m; ++n) {
        worst = std::max(worst, std::fabs(expected_bon_exact(ss, es, n) - enumerate_bon(s, e, n)));
      }
    }
  }
  o.check(worst < 1e-12, fmt("kernel vs enumeration off by %.3g", worst));

  // Enumerated replica of the study on pools of 8 against the library study.
  InterferenceConfig small = cfg;
  small.schedule = {1, 2, 4, 8};
  small.trials = 4000;
  const auto lib = interference_study(small);
  constexpr int kTrials = 4000;
  std::vector<std::vector<double>> rep_same(4), rep_ind(4);
  for (int t = 0; t < kTrials; ++t) {
    std::vector<double> s(8), f(8);
    for (int i = 0; i < 8; ++i) {
      s[i] = u(eng) + z(eng);
      f[i] = u(eng);
    }
    for (int j = 0; j < 4; ++j) {
      rep_same[j].push_back(enumerate_bon(s, s, 1 << j));
      rep_ind[j].push_back(enumerate_bon(s, f, 1 << j));
    }
  }
  auto mean_se = [](const std::vector<double>& v) {
    double m = 0, ss = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) ss += (x - m) * (x - m);
    return std::make_pair(m, std::sqrt(ss / static_cast<double>(v.size())) / std::sqrt(static_cast<double>(v.size())));
  };
  for (int j = 0; j < 4; ++j) {
    for (const auto& [rep, curve] : {std::pair{&rep_same[j], &lib[0]}, std::pair{&rep_ind[j], &lib[1]}}) {
      const auto [m, se] = mean_se(*rep);
      const auto& p = curve->points[static_cast<std::size_t>(j)];
      const double tol = 4.0 * std::hypot(se, p.standard_error);
      o.check(std::fabs(m - p.mean) <= tol,
              curve->mode.label() + " N=" + std::to_string(p.n) + fmt(" study %.4f vs enumeration %.4f", p.mean, m));
    }
  }
  if (o.pass) {
    o.detail = fmt("N=32 same %.4f independent %.4f; enumeration agrees", same.points.back().mean,
                   indep.points.back().mean);
  }
  return o;
}

struct MetricFixture {
  std::vector<std::string> hyps;
  std::vector<std::vector<std::string>> refs;
  json doc;

  explicit MetricFixture(const std::string& name) {
    doc = json::parse(read_file(fixture(name)));
    hyps = doc.at("hyps").get<std::vector<std::string>>();
    const auto streams = doc.at("refs").get<std::vector<std::vector<std::string>>>();
    refs.resize(hyps.size());
    for (const auto& stream : streams) {
      for (std::size_t i = 0; i < hyps.size(); ++i) refs[i].push_back(stream[i]);
    }
  }
};

Outcome string_metrics() {
  Outcome o;
  std::string detail;
  for (const char* name : {"textmetrics_latin.json", "textmetrics_char.json"}) {
    const MetricFixture f(name);
    BleuConfig bc;
    bc.tokenizer = parse_bleu_tokenizer(f.doc.at("tokenize").get<std::string>());
    const double bleu = bleu_corpus(f.hyps, f.refs, bc);
    const double chrf = chrfpp_corpus(f.hyps, f.refs);
    const double want_b = f.doc.at("bleu").get<double>(), want_c = f.doc.at("chrfpp").get<double>();
    o.check(f.hyps.size() == 10, std::string(name) + " is not a 10-sentence corpus");
    o.check(std::fabs(bleu - want_b) <= 0.1, std::string(name) + fmt(" BLEU %.4f vs %.4f", bleu, want_b));
    o.check(std::fabs(chrf - want_c) <= 0.1, std::string(name) + fmt(" chrF++ %.4f vs %.4f", chrf, want_c));
    detail += std::string(detail.empty() ? "" : "; ") + name + fmt(" BLEU %.2f chrF++ %.2f", bleu, chrf);
  }
  if (o.pass) o.detail = detail;
  return o;
}

const char* const kIcelandicRef =
    "Eftirlit mun ekki einungis bæta líf fólks sem situr í fangageymslum. Vinnuhópurinn okkar komst "
    "að þeirri niðurstöðu að slíkur eftirlitsaðili gæti unnið með fangageymslukerfum sem komin eru að "
    "þolmörkum og veitt þarfa aðstoð og ráðgjöf, þar á meðal með því að hjálpa til við að móta "
    "upplýstar stefnur sem stuðla að öryggi starfsfólks og draga úr endurkomu fanga í fangelsi.";
const char* const kHypN1024 =
    "Af监督既不是囚犯的专属利益。我们的任务小组认识到，监督办公室能够与负担过重的监狱系统合作，提供所需的援助和建议，"
    "包括促进员工安全和减少再犯率的智能政策。";

Outcome codeswitch() {
  Outcome o;
  const auto hyp = detect(kHypN1024, "is");
  const auto ref = detect(kIcelandicRef, "is");
  o.check(hyp.flagged && hyp.foreign_ratio > 0.9, fmt("N=1024 hypothesis ratio %.4f", hyp.foreign_ratio));
  o.check(!ref.flagged && ref.foreign_ratio < 0.05, fmt("reference ratio %.4f", ref.foreign_ratio));
  if (o.pass) o.detail = fmt("hypothesis %.4f flagged, reference %.4f", hyp.foreign_ratio, ref.foreign_ratio);
  return o;
}

Outcome table_reproduction() {
  Outcome o;
  const fs::path path = fixture("table2_en_zh.csv");
  const ResultsTable t = ingest_results(path);
  const auto deltas = compute_deltas(t.report, 1, 1024);
  std::map<std::pair<std::string, std::string>, std::string> got;
  for (const auto& d : deltas) got[{d.model, d.metric}] = d.rendered();
  const std::string b3 = got[{"Qwen2.5-3B", "bleu"}], x72 = got[{"Qwen2.5-72B", "xcomet"}];
  o.check(b3 == "+1.3", "3B BLEU delta '" + b3 + "'");
  o.check(x72 == "+3.57", "72B XCOMET delta '" + x72 + "'");
  o.check(export_results(t) == read_file(path), "export differs from the ingested file");
  if (o.pass) o.detail = "3B BLEU " + b3 + ", 72B XCOMET " + x72 + ", export byte-identical";
  return o;
}

std::map<std::string, std::string> pipeline(const fs::path& dir) {
  const std::string segs = fixture("segments.jsonl").string();
  const std::string out = dir.string();
  const std::vector<std::vector<std::string>> steps = {
      {"gen", "--dataset", segs, "--backend", "sim", "--n", "16", "--codeswitch-rate", "0.1"},
      {"score", "--dataset", segs, "--metric", "kiwi22-sim", "--metric", "sim-oracle", "--noise", "gaussian",
       "--sigma", "0.1"},
      {"select", "--draws", "4"},
      {"curve", "--dataset", segs, "--model", "qwen2.5-7b", "--eval", "sim-oracle", "--eval", "bleu", "--eval",
       "chrf++"},
      {"report", "--dataset", segs, "--model", "qwen2.5-7b", "--eval", "sim-oracle", "--eval", "bleu", "--eval",
       "chrf++"},
  };
  std::map<std::string, std::string> files;
  for (const auto& step : steps) {
    std::vector<std::string> args = {"--seed", "7", "--out", out};
    args.insert(args.end(), step.begin(), step.end());
    std::ostringstream so, se;
    const int code = ttsmt::cli::run(args, so, se);
    if (code != 0) throw std::runtime_error(step.front() + " exited " + std::to_string(code) + ": " + se.str());
    files["stdout:" + step.front()] = so.str();
  }
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_file(e.path());
  return files;
}

Outcome end_to_end() {
  Outcome o;
  const TempDir a("accept-a"), b("accept-b");
  const auto first = pipeline(a.path());
  const auto second = pipeline(b.path());
  for (const char* must : {"candidates.jsonl", "scores.jsonl", "selections.jsonl", "final.jsonl", "curve.csv",
                           "report.json"}) {
    o.check(first.count(must) == 1, std::string(must) + " not written");
  }
  o.check(first.size() == second.size(), "different file sets");
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    o.check(it != second.end() && it->second == bytes, name + " differs between runs");
  }
  if (o.pass) o.detail = std::to_string(first.size()) + " artifacts byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"estimator matches exact best-of-N", estimator_vs_oracle},
      {"perfect-QE order statistics N/(N+1)", order_statistics_law},
      {"hypergeometric mass sums to one", hypergeometric_mass},
      {"FLOPs and memory fixtures", flops_fixtures},
      {"metric interference inflation", interference},
      {"BLEU and chrF++ reference fixtures", string_metrics},
      {"code-switch detection on the Icelandic example", codeswitch},
      {"results table deltas and export", table_reproduction},
      {"end-to-end determinism", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
