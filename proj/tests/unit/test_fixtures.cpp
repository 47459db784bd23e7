#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"
#include "termbt/error.hpp"
#include "termbt/fixtures.hpp"
#include "termbt/terms.hpp"

using namespace termbt;
using namespace termbt::fixtures;
using termbt::testing::TempDir;

namespace {

const LangTag cn = LangTag::parse("zh-cn");
const LangTag tw = LangTag::parse("zh-tw");

const TermTriple& row(const FixtureSet& f, const std::string& en) {
  for (const auto& t : f.term_triples) {
    if (t.en == en) return t;
  }
  throw std::runtime_error("no row " + en);
}

std::filesystem::path copy_data(const TempDir& dir) {
  const auto dst = dir / "data";
  std::filesystem::copy(default_data_dir(), dst, std::filesystem::copy_options::recursive);
  return dst;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Fixtures, RowCounts) {
  EXPECT_EQ(load_fixture("he2016").term_triples.size(), 14u);
  EXPECT_EQ(load_fixture("dy2023").term_triples.size(), 11u);
  EXPECT_EQ(load_fixture("ling2025-terms").term_triples.size(), 5u);
  EXPECT_EQ(fixture_names().size(), 3u);
}

TEST(Fixtures, UnknownName) {
  try {
    load_fixture("he2017");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Fixture);
  }
}

TEST(Fixtures, ChecksumMismatch) {
  TempDir dir;
  const auto data = copy_data(dir);
  std::ofstream(data / "fixtures" / "he2016.json", std::ios::app) << " ";
  try {
    load_fixture("he2016", data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Checksum);
  }
}

TEST(Fixtures, CrlfCheckoutStillVerifies) {
  TempDir dir;
  const auto data = copy_data(dir);
  const auto file = data / "fixtures" / "dy2023.json";
  std::string content = slurp(file), crlf;
  for (char c : content) crlf += c == '\n' ? std::string("\r\n") : std::string(1, c);
  termbt::testing::write_file(file, crlf);
  EXPECT_EQ(checksum(crlf), checksum(content));
  EXPECT_EQ(load_fixture("dy2023", data).term_triples, load_fixture("dy2023").term_triples);
}

TEST(Fixtures, LineEndingNormalization) {
  EXPECT_EQ(normalize_line_endings("a\r\nb\rc\n"), "a\nb\nc\n");
}

TEST(Fixtures, EnTermsInExcerptOrFlagged) {
  for (const auto& name : fixture_names()) {
    const auto f = load_fixture(name);
    const std::string text = terms::base_normalize(f.source_excerpt.text);
    for (const auto& t : f.term_triples) {
      const bool found = text.find(terms::base_normalize(t.en)) != std::string::npos;
      EXPECT_TRUE(found || t.abstract_wide) << name << ": " << t.en;
    }
  }
}

TEST(Fixtures, He2016QualitativeRows) {
  const auto f = load_fixture("he2016");
  const auto& nets = row(f, "Residual nets");
  EXPECT_EQ(nets.eny.at(cn), "Residual networks");
  EXPECT_NE(terms::normalize_term(nets.en, nullptr), terms::normalize_term(nets.eny.at(cn), nullptr));
  const auto& layer = row(f, "Layer inputs");
  EXPECT_FALSE(layer.l2.at(cn).has_value());
  EXPECT_TRUE(layer.l2.at(tw).has_value());
}

TEST(Fixtures, LingEmbodiedAiSameEverywhere) {
  const auto f = load_fixture("ling2025-terms");
  const auto& r = row(f, "embodied AI");
  ASSERT_EQ(r.eny.size(), 3u);
  for (const auto& [lang, eny] : r.eny) EXPECT_EQ(eny, "embodied AI") << lang.code();
  EXPECT_EQ(r.consistency, "EMR");
}

TEST(Fixtures, ProbeTextContainsEveryTerm) {
  const auto f = load_fixture("he2016");
  const std::string probe = probe_text(f);
  EXPECT_EQ(probe.rfind(f.source_excerpt.text, 0), 0u);
  for (const auto& t : f.term_triples) EXPECT_NE(probe.find("\n" + t.en + "\n"), std::string::npos) << t.en;
}

TEST(Fixtures, ReplayLexiconDirections) {
  const auto f = load_fixture("he2016");
  const auto fwd = replay_lexicon(f, cn, ReplayDirection::Forward);
  EXPECT_EQ(fwd.apply("Residual nets"), "残差网络");
  const auto back = replay_lexicon(f, cn, ReplayDirection::Back);
  EXPECT_EQ(back.apply(fwd.apply("Residual nets")), "Residual networks");
}

TEST(Fixtures, DataDirOverride) {
  TempDir dir;
  const auto data = copy_data(dir);
  ::setenv("TERMBT_DATA_DIR", data.c_str(), 1);
  EXPECT_EQ(default_data_dir(), data);
  ::unsetenv("TERMBT_DATA_DIR");
}
