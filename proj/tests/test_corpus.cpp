#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"
#include "ttsmt/corpus.hpp"
#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/languages.hpp"
#include "ttsmt/toml_lite.hpp"

using namespace ttsmt;
using ttsmt::testing::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string record(const std::string& id, const std::string& src_lang = "en",
                   const std::string& tgt_lang = "de") {
  return R"({"id":")" + id + R"(","src_lang":")" + src_lang + R"(","tgt_lang":")" + tgt_lang +
         R"(","domain":"news","src":"Hello.","refs":["Hallo."]})";
}

}  // namespace

TEST(LangPair, ParsesAndRoundTrips) {
  const LangPair p = LangPair::parse("en-ja");
  EXPECT_EQ(p.src, "en");
  EXPECT_EQ(p.tgt, "ja");
  EXPECT_EQ(p.str(), "en-ja");
}

TEST(LangPair, RejectsMalformed) {
  EXPECT_THROW(LangPair::parse("en"), ValidationError);
  EXPECT_THROW(LangPair::parse("en-en"), ValidationError);
  EXPECT_THROW(LangPair::parse("EN-de"), ValidationError);
  EXPECT_THROW(LangPair::parse("en-"), ValidationError);
  EXPECT_THROW(LangPair::parse("english-de"), ValidationError);
}

TEST(Languages, CodesAndDefaults) {
  EXPECT_TRUE(is_valid_language_code("is"));
  EXPECT_TRUE(is_valid_language_code("fil"));
  EXPECT_FALSE(is_valid_language_code("e"));
  EXPECT_FALSE(is_valid_language_code("En"));
  const auto& t = LanguageTable::defaults();
  for (const char* code : {"en", "de", "ja", "zh", "ru", "es", "cs", "is"}) {
    EXPECT_TRUE(t.contains(code)) << code;
  }
  EXPECT_EQ(t.at("is").name, "Icelandic");
  EXPECT_THROW(t.at("xx"), ConfigError);
}

TEST(Dataset, LoadsFixture) {
  const Dataset ds = load_dataset(ttsmt::testing::fixture("segments.jsonl"));
  EXPECT_EQ(ds.name(), "segments");
  EXPECT_EQ(ds.size(), 12u);
  const Segment& s = ds.at("is-002");
  EXPECT_EQ(s.pair.str(), "en-is");
  EXPECT_EQ(s.refs.front(), "Takk fyrir yndislegt kvöld.");
  EXPECT_EQ(filter_pair(ds, LangPair::parse("en-zh")).size(), 4u);
  EXPECT_TRUE(filter_pair(ds, LangPair::parse("en-ja")).empty());
}

TEST(Dataset, SaveLoadRoundTrip) {
  TempDir dir("corpus");
  const Dataset a = load_dataset(ttsmt::testing::fixture("segments.jsonl"));
  save_dataset(a, dir / "segments.jsonl");
  const Dataset b = load_dataset(dir / "segments.jsonl");
  EXPECT_EQ(a, b);
}

TEST(Dataset, RejectsDuplicateIdsWithLineNumber) {
  TempDir dir("corpus");
  write(dir / "d.jsonl", record("a") + "\n" + record("b") + "\n" + record("a") + "\n");
  try {
    load_dataset(dir / "d.jsonl");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Dataset, RejectsUnknownLanguage) {
  TempDir dir("corpus");
  write(dir / "d.jsonl", record("a", "en", "xx") + "\n");
  EXPECT_THROW(load_dataset(dir / "d.jsonl"), ValidationError);
}

TEST(Dataset, RejectsMalformedRecords) {
  TempDir dir("corpus");
  write(dir / "bad_json.jsonl", "{not json}\n");
  EXPECT_THROW(load_dataset(dir / "bad_json.jsonl"), ValidationError);
  write(dir / "missing.jsonl", R"({"id":"a","src_lang":"en","tgt_lang":"de","domain":"x","refs":[]})" "\n");
  EXPECT_THROW(load_dataset(dir / "missing.jsonl"), ValidationError);
  write(dir / "empty.jsonl", "\n\n");
  EXPECT_THROW(load_dataset(dir / "empty.jsonl"), ValidationError);
  EXPECT_THROW(load_dataset(dir / "absent.jsonl"), ValidationError);
}

TEST(Dataset, BlankLinesSkipped) {
  TempDir dir("corpus");
  write(dir / "d.jsonl", "\n" + record("a") + "\n\n" + record("b") + "\n");
  EXPECT_EQ(load_dataset(dir / "d.jsonl").size(), 2u);
}

TEST(Dataset, MissingRefsAllowed) {
  TempDir dir("corpus");
  write(dir / "d.jsonl",
        R"({"id":"a","src_lang":"en","tgt_lang":"de","domain":"news","src":"Hi.","refs":[]})" "\n");
  const Dataset ds = load_dataset(dir / "d.jsonl");
  EXPECT_TRUE(ds.at("a").refs.empty());
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 19968.0, 1e-12, -2.5, 123456789.125}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(19968.0), "19968");
}

TEST(Io, AtomicWriteReplaces) {
  TempDir dir("io");
  write_file_atomic(dir / "x.txt", "one");
  write_file_atomic(dir / "x.txt", "two");
  EXPECT_EQ(read_file(dir / "x.txt"), "two");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++n;
  EXPECT_EQ(n, 1u);
}

TEST(Io, DumpLineKeepsUtf8) {
  EXPECT_EQ(dump_line(json{{"t", "ölið 猫"}}), "{\"t\":\"ölið 猫\"}");
}

TEST(Io, SplitKeepsEmptyFields) {
  EXPECT_EQ(split("a,,b,", ','), (std::vector<std::string>{"a", "", "b", ""}));
}

TEST(Toml, ParsesSubset) {
  const auto doc = parse_toml(R"(
title = "x"   # comment
[plan]
selection = "kiwi22-sim"
evaluation = ["bleu", "chrf++"]
draws = 1_000
ratio = 0.5
flag = true
[[model]]
name = "a"
[[model]]
name = 'b'
[languages.is]
name = "Icelandic"
)");
  EXPECT_EQ(doc.table("")->get_string("title"), "x");
  const TomlTable* plan = doc.table("plan");
  ASSERT_NE(plan, nullptr);
  EXPECT_EQ(plan->get_int("draws"), 1000);
  EXPECT_EQ(plan->get_double("ratio"), 0.5);
  EXPECT_EQ(plan->get_double("draws"), 1000.0);
  EXPECT_EQ(plan->get_bool("flag"), true);
  EXPECT_EQ(plan->get_string_list("evaluation"), (std::vector<std::string>{"bleu", "chrf++"}));
  ASSERT_EQ(doc.array("model").size(), 2u);
  EXPECT_EQ(doc.array("model")[1].get_string("name"), "b");
  EXPECT_EQ(doc.subtables("languages").count("is"), 1u);
}

TEST(Toml, SyntaxErrorNamesLine) {
  try {
    parse_toml("a = 1\nb = \n", "cfg.toml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.toml:2"), std::string::npos) << e.what();
  }
}
