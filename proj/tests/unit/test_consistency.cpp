#include <gtest/gtest.h>

#include "support.hpp"
#include "termbt/consistency.hpp"
#include "termbt/embedding.hpp"
#include "termbt/error.hpp"
#include "termbt/fixtures.hpp"

using namespace termbt;
using namespace termbt::consistency;
using termbt::testing::make_term;

namespace {

const LangTag cn = LangTag::parse("zh-cn");

std::vector<Term> terms_of(std::initializer_list<const char*> surfaces, const char* lang = "en") {
  std::vector<Term> out;
  for (const char* s : surfaces) out.push_back(make_term(s, lang));
  return out;
}

TermRecord record(bool paired, bool semantic, bool shrunk, bool dropped) {
  TermRecord r{termbt::testing::make_term("x")};
  r.en = make_term("vgg nets");
  if (paired) r.eny = make_term(shrunk ? "vgg" : "vgg nets");
  r.exact_match = paired && !shrunk && semantic;
  r.semantic_match = paired && semantic;
  if (dropped) r.intermediates.push_back({cn, std::nullopt});
  return r;
}

}  // namespace

TEST(Align, IdenticalListsAllExact) {
  HashedNgramEmbedder e;
  const auto en = terms_of({"residual learning", "ImageNet", "VGG nets"});
  const auto al = align_terms(en, en, {}, e, {});
  ASSERT_EQ(al.records.size(), 3u);
  for (const auto& r : al.records) {
    EXPECT_TRUE(r.exact_match);
    EXPECT_TRUE(r.semantic_match);
    EXPECT_EQ(r.irs, 1.0);
  }
  EXPECT_TRUE(al.unmatched_eny.empty());
}

TEST(Align, NetsPairWithNetworksSemantically) {
  HashedNgramEmbedder e;
  const auto al = align_terms(terms_of({"Residual nets"}), terms_of({"Residual networks"}), {}, e, {});
  ASSERT_EQ(al.records.size(), 1u);
  const auto& r = al.records[0];
  ASSERT_TRUE(r.eny.has_value());
  EXPECT_EQ(r.eny->surface, "Residual networks");
  EXPECT_FALSE(r.exact_match);
  EXPECT_TRUE(r.semantic_match);
}

TEST(Align, OmittedIntermediateIsNoted) {
  HashedNgramEmbedder e;
  terms::TermLexicon lex;
  lex.add_pair("layer inputs", cn, "层输入");
  lex.add_pair("residual learning", cn, "残差学习");
  const std::vector<std::pair<LangTag, std::vector<Term>>> l2 = {{cn, terms_of({"残差学习"}, "zh-cn")}};
  const AlignOptions opts{0.6, 0.75, &lex};
  const auto al = align_terms(terms_of({"Layer inputs", "residual learning"}),
                              terms_of({"inputs", "residual learning"}), l2, e, opts);
  ASSERT_EQ(al.records.size(), 2u);
  const auto& layer = al.records[0];
  ASSERT_EQ(layer.intermediates.size(), 1u);
  EXPECT_FALSE(layer.intermediates[0].term.has_value());
  EXPECT_TRUE(layer.intermediate_dropped());
  EXPECT_NE(layer.notes.find("omitted in zh-cn"), std::string::npos) << layer.notes;
  ASSERT_NE(al.records[1].intermediate(cn), nullptr);
  EXPECT_EQ(al.records[1].intermediate(cn)->surface, "残差学习");
}

TEST(Align, UnpairedWhenNothingIsClose) {
  HashedNgramEmbedder e;
  const auto al = align_terms(terms_of({"ImageNet"}), terms_of({"carbon neutrality"}), {}, e, {});
  EXPECT_FALSE(al.records[0].eny.has_value());
  EXPECT_EQ(al.records[0].irs, 0.0);
  ASSERT_EQ(al.unmatched_eny.size(), 1u);
}

TEST(Classify, NeuralNetVsNetwork) {
  HashedNgramEmbedder e;
  const auto m = classify_match(make_term("neural network"), make_term("neural net"), e, 0.75);
  EXPECT_FALSE(m.exact);
  EXPECT_TRUE(m.semantic);
}

TEST(Classify, IdenticalTerms) {
  HashedNgramEmbedder e;
  const auto m = classify_match(make_term("ImageNet"), make_term("imagenet"), e, 0.75);
  EXPECT_TRUE(m.exact);
  EXPECT_TRUE(m.semantic);
  EXPECT_DOUBLE_EQ(m.score, 1.0);
}

TEST(Classify, SynonymFixtureForcesPotentiate) {
  const auto fx = fixtures::load_fixture("dy2023");
  HashedNgramEmbedder plain;
  HashedNgramEmbedder with_syn("h", 256, 3, std::make_shared<SynonymGroups>(fx.synonyms));
  const auto before = classify_match(make_term("potentiate"), make_term("exacerbate"), plain, 0.75);
  const auto after = classify_match(make_term("potentiate"), make_term("exacerbate"), with_syn, 0.75);
  EXPECT_FALSE(before.semantic);
  EXPECT_FALSE(after.exact);
  EXPECT_TRUE(after.semantic);
}

TEST(ScoreIrs, RuleTable) {
  // oracle over (paired, semantic, lost a token or intermediate stage)
  for (bool paired : {false, true}) {
    for (bool semantic : {false, true}) {
      for (bool shrunk : {false, true}) {
        for (bool dropped : {false, true}) {
          const TermRecord r = record(paired, semantic, shrunk, dropped);
          const double expected = !(paired && semantic) ? 0.0 : (shrunk || dropped) ? 0.5 : 1.0;
          EXPECT_EQ(score_irs(r), expected) << paired << semantic << shrunk << dropped;
        }
      }
    }
  }
}

TEST(ScoreIrs, VggNetsToVgg) {
  TermRecord r{termbt::testing::make_term("x")};
  r.en = make_term("VGG nets");
  r.eny = make_term("VGG");
  r.semantic_match = true;
  EXPECT_EQ(score_irs(r), 0.5);
}

TEST(ScoreIrs, ExactIsOneAbsentIsZero) {
  EXPECT_EQ(score_irs(record(true, true, false, false)), 1.0);
  EXPECT_EQ(score_irs(record(false, false, false, false)), 0.0);
}

TEST(Report, EmrHandCount) {
  std::vector<TermRecord> rs;
  for (int i = 0; i < 14; ++i) {
    TermRecord r = record(true, i < 12, false, false);
    r.exact_match = i < 9;
    r.irs = score_irs(r);
    rs.push_back(r);
  }
  const auto rep = compute_report("ENcn", rs, {}, std::nullopt);
  EXPECT_NEAR(rep.emr, 100.0 * 9 / 14, 1e-12);
  EXPECT_NEAR(rep.emr, 64.29, 0.005);
  EXPECT_NEAR(rep.smr, 100.0 * 12 / 14, 1e-12);
  EXPECT_EQ(rep.term_level_accuracy, rep.smr);
  EXPECT_NEAR(rep.irs_mean, 12.0 / 14, 1e-12);
}

TEST(Report, AllExact) {
  std::vector<TermRecord> rs = {record(true, true, false, false), record(true, true, false, false)};
  rs[1].en = make_term("imagenet");
  rs[1].eny = rs[1].en;
  for (auto& r : rs) r.irs = score_irs(r);
  const auto rep = compute_report("p", rs, {}, std::nullopt);
  EXPECT_EQ(rep.emr, 100.0);
  EXPECT_EQ(rep.smr, 100.0);
  EXPECT_EQ(rep.irs_mean, 1.0);
  EXPECT_EQ(rep.tdi, 0.0);
}

TEST(Report, WeightedIrs) {
  std::vector<TermRecord> rs = {record(true, true, false, false), record(false, false, false, false)};
  rs[1].en = make_term("imagenet");
  for (auto& r : rs) r.irs = score_irs(r);
  const auto rep = compute_report("p", rs, {}, std::nullopt, {{"vgg nets", 3.0}});
  EXPECT_NEAR(rep.irs_mean, 3.0 / 4.0, 1e-12);
}

TEST(Report, EmptyIsPrecondition) {
  try {
    compute_report("p", {}, {}, std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Precondition);
  }
}

TEST(Tdi, Examples) {
  EXPECT_EQ(compute_tdi(std::vector<std::string>{"a", "b"}, std::vector<std::string>{"b", "a"}), 0.0);
  EXPECT_EQ(compute_tdi(std::vector<std::string>{"a", "b"}, std::vector<std::string>{"c"}), 1.0);
  EXPECT_DOUBLE_EQ(compute_tdi(std::vector<std::string>{"a", "a", "b", "b"}, std::vector<std::string>{"a", "a", "a", "b"}),
                   0.25);
  EXPECT_DOUBLE_EQ(termbt::testing::brute_force_tvd({"a", "a", "b", "b"}, {"a", "a", "a", "b"}), 0.25);
}

TEST(Confidence, Examples) {
  EXPECT_EQ(confidence_score({{true, 1.0}, {true, 1.0}}), 1.0);
  EXPECT_NEAR(confidence_score({{true, 1.0}, {false, 0.8}}), 0.70, 1e-12);
  EXPECT_EQ(confidence_score({{false, 0.0}}), 0.0);
}

TEST(Trigram, Jaccard) {
  EXPECT_EQ(char_trigram_jaccard("abcd", "abcd"), 1.0);
  EXPECT_DOUBLE_EQ(char_trigram_jaccard("abcd", "abce"), 1.0 / 3.0);
  EXPECT_EQ(char_trigram_jaccard("abc", "xyz"), 0.0);
}

TEST(AlignTriples, ProviderTriplesClassified) {
  HashedNgramEmbedder e;
  const TripleList triples = {{"residual nets", "残差网络", "residual networks"}, {"layer inputs", std::nullopt, std::nullopt}};
  const auto al = align_from_triples(triples, LangTag::parse("en"), cn, e, {});
  ASSERT_EQ(al.records.size(), 2u);
  EXPECT_TRUE(al.records[0].semantic_match);
  EXPECT_FALSE(al.records[0].exact_match);
  EXPECT_FALSE(al.records[1].eny.has_value());
  EXPECT_TRUE(al.records[1].intermediate_dropped());
}
