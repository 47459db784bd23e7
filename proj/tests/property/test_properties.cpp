#include <fmt/format.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "support.hpp"
#include "termbt/consistency.hpp"
#include "termbt/lexicon.hpp"
#include "termbt/textmetrics.hpp"
#include "termbt/translation.hpp"

using namespace termbt;
using termbt::testing::Gen;
using termbt::testing::PropertyResult;

namespace {

constexpr int kCases = 1000;

void expect_property(const PropertyResult& r) {
  EXPECT_GE(r.cases, kCases) << r.name;
  EXPECT_TRUE(r.ok()) << r.name << ": " << r.failures << " failures, first: " << r.first_failure;
}

std::string join(const std::vector<std::string>& v, const std::string& sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::size_t lev(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

// Independent path check: walk the hop chain by hand.
bool chain_ok(const BtPath& p) {
  if (p.hops.size() < 2) return false;
  std::string at = p.hops[0].from.code();
  for (const Hop& h : p.hops) {
    if (h.from.code() != at) return false;
    at = h.to.code();
  }
  if (at != p.hops[0].from.code()) return false;
  return p.topology == Topology::Serial || p.hops.size() == 2;
}

}  // namespace

TEST(Property, MetricRanges) { expect_property(termbt::testing::check_metric_ranges(101, kCases)); }
TEST(Property, SmrAtLeastEmr) { expect_property(termbt::testing::check_smr_ge_emr(102, kCases)); }
TEST(Property, TdiAxioms) { expect_property(termbt::testing::check_tdi_axioms(103, kCases)); }
TEST(Property, NormalizeIdempotent) { expect_property(termbt::testing::check_normalize_idempotence(104, kCases)); }
TEST(Property, AlignmentInjective) { expect_property(termbt::testing::check_alignment_injectivity(105, kCases)); }
TEST(Property, TermbaseCrashSafety) { expect_property(termbt::testing::check_termbase_crash_safety(106, kCases)); }

TEST(Property, ValidatePathMatchesChainWalker) {
  Gen g(201);
  const std::vector<LangTag> langs = {LangTag::parse("en"), LangTag::parse("zh-cn"), LangTag::parse("zh-tw"),
                                      LangTag::parse("ja")};
  int accepted = 0;
  for (int i = 0; i < kCases * 4; ++i) {
    BtPath p;
    p.topology = g.coin() ? Topology::Parallel : Topology::Serial;
    const int n = g.range(0, 5);
    // bias toward well-formed chains so both outcomes are exercised
    const bool chained = g.coin(0.7);
    LangTag at = g.pick(langs);
    const LangTag start = at;
    for (int k = 0; k < n; ++k) {
      LangTag from = chained ? at : g.pick(langs);
      LangTag to = (k == n - 1 && g.coin(0.8)) ? start : g.pick(langs);
      p.hops.push_back({from, to, "identity"});
      at = to;
    }
    const bool expected = !p.hops.empty() && chain_ok(p);
    bool threw = false;
    try {
      validate_path(p);
    } catch (const PathError&) {
      threw = true;
    }
    ASSERT_EQ(!threw, expected) << "case " << i << " hops " << p.hops.size();
    accepted += expected;
  }
  EXPECT_GT(accepted, 100);
}

TEST(Property, TerWithoutShiftsIsLevenshteinOverRefLength) {
  Gen g(202);
  int unshifted = 0;
  for (int i = 0; i < kCases * 3; ++i) {
    const auto cand = g.tokens(0, 6, 3);
    const auto ref = g.tokens(1, 6, 3);
    const std::size_t d = lev(cand, ref);
    ASSERT_EQ(textmetrics::word_levenshtein(cand, ref), d);
    const auto t = textmetrics::ter(cand, ref);
    const double plain = static_cast<double>(d) / static_cast<double>(ref.size());
    ASSERT_LE(t.score, plain + 1e-12) << join(cand) << " | " << join(ref);
    if (t.shifts == 0) {
      ++unshifted;
      ASSERT_DOUBLE_EQ(t.score, plain) << join(cand) << " | " << join(ref);
    }
  }
  EXPECT_GT(unshifted, kCases);
}

TEST(Property, BleuInvariantUnderRelabeling) {
  Gen g(203);
  textmetrics::MetricParams params;
  for (int i = 0; i < kCases; ++i) {
    const auto cand = g.tokens(1, 12, 5);
    const auto ref = g.tokens(1, 12, 5);
    std::vector<int> perm = {0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), g.engine());
    auto relabel = [&](std::vector<std::string> v) {
      for (auto& w : v) w = fmt::format("z{}", perm[static_cast<std::size_t>(w[1] - '0')]);
      return v;
    };
    const double a = textmetrics::bleu(cand, ref, params).score;
    const double b = textmetrics::bleu(relabel(cand), relabel(ref), params).score;
    ASSERT_DOUBLE_EQ(a, b) << join(cand) << " | " << join(ref);
  }
}

TEST(Property, UnigramPrecisionDropsWhenAppendingUnmatchedToken) {
  Gen g(204);
  textmetrics::MetricParams params;
  for (int i = 0; i < kCases; ++i) {
    auto cand = g.tokens(1, 10, 4);
    const auto ref = g.tokens(1, 10, 4);
    const double before = textmetrics::bleu(cand, ref, params).precisions.at(0);
    cand.push_back("unseen");
    const double after = textmetrics::bleu(cand, ref, params).precisions.at(0);
    ASSERT_LE(after, before) << join(cand) << " | " << join(ref);
    if (before > 0) ASSERT_LT(after, before);
  }
}

TEST(Property, EmptyPerturbationIsIdentity) {
  Gen g(205);
  PerturbationTranslator p("p", SubstitutionLexicon{}, 0.0, 9);
  IdentityTranslator id("identity");
  const LangTag en = LangTag::parse("en");
  for (int i = 0; i < kCases; ++i) {
    const std::string text = g.unicode_text(60);
    ASSERT_EQ(p.perturb(text), text);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const Document doc = Document::source(text, en);
    ASSERT_EQ(p.render(doc, en), id.render(doc, en));
  }
}

TEST(Property, PerturbationIsDeterministic) {
  Gen g(206);
  SubstitutionLexicon subs;
  subs.add("residual", "remaining");
  subs.add("network", "net");
  for (int i = 0; i < kCases; ++i) {
    std::string text;
    for (int k = g.range(1, 6); k > 0; --k) text += g.phrase(4) + (g.coin() ? ". " : ", ");
    const double omission = g.real(0.0, 0.6);
    const auto seed = static_cast<std::uint64_t>(g.range(0, 1 << 20));
    PerturbationTranslator a("a", subs, omission, seed);
    PerturbationTranslator b("b", subs, omission, seed);
    const std::string out = a.perturb(text);
    ASSERT_EQ(out, a.perturb(text));
    ASSERT_EQ(out, b.perturb(text));
  }
}

TEST(Property, ExtractionStableUnderWhitespaceReflow) {
  Gen g(207);
  terms::TermLexicon lex;
  const LangTag en = LangTag::parse("en");
  for (const char* t : {"residual learning", "deep residual network", "vgg nets", "image", "training error"}) {
    lex.add(en, terms::normalize_term(t));
  }
  const std::vector<std::string> gaps = {"  ", "\n", "\t", " \n  ", "\r\n"};
  for (int i = 0; i < kCases; ++i) {
    std::vector<std::string> words;
    for (int k = g.range(1, 5); k > 0; --k) {
      const std::string p = g.coin(0.4) ? "residual learning" : g.coin() ? "VGG nets" : g.phrase(3);
      words.push_back(p);
      if (g.coin(0.3)) words.push_back("CIFAR-10");
    }
    const std::string flat = join(words) + ".";
    std::string reflowed;
    for (char c : flat) reflowed += c == ' ' ? g.pick(gaps) : std::string(1, c);

    auto normalized = [&](const std::string& text) {
      std::vector<std::string> out;
      for (const auto& t : terms::extract_rule_based(Document::source(text, en), lex)) out.push_back(t.normalized);
      return out;
    };
    ASSERT_EQ(normalized(flat), normalized(reflowed)) << flat;
  }
}

TEST(Property, ScoreIrsTakesThreeValues) {
  Gen g(208);
  const LangTag cn = LangTag::parse("zh-cn");
  for (int i = 0; i < kCases; ++i) {
    consistency::TermRecord r{termbt::testing::make_term("x")};
    r.en = termbt::testing::make_term(g.phrase(3));
    if (g.coin(0.8)) r.eny = termbt::testing::make_term(g.phrase(3));
    r.semantic_match = g.coin();
    r.exact_match = r.semantic_match && g.coin();
    for (int k = g.range(0, 2); k > 0; --k) {
      r.intermediates.push_back({cn, g.coin() ? std::optional<terms::Term>(termbt::testing::make_term("残差", "zh-cn"))
                                              : std::nullopt});
    }
    const double irs = consistency::score_irs(r);
    ASSERT_TRUE(irs == 0.0 || irs == 0.5 || irs == 1.0) << irs;
    if (!r.eny || !r.semantic_match) ASSERT_EQ(irs, 0.0);
  }
}

TEST(Property, ConfigRoundTrip) {
  Gen g(209);
  std::vector<RunConfig> bases;
  for (const auto& e : std::filesystem::directory_iterator(termbt::testing::source_dir() / "configs")) {
    bases.push_back(load_config(e.path()));
  }
  ASSERT_FALSE(bases.empty());
  for (int i = 0; i < kCases; ++i) {
    RunConfig c = g.pick(bases);
    c.seed = static_cast<std::uint64_t>(g.range(0, 1 << 30));
    c.label = g.phrase(3);
    c.thresholds.tau_sem = g.real(0.5, 0.95);
    c.thresholds.tau_align = g.real(0.1, c.thresholds.tau_sem);
    c.metric_params.bleu_max_n = g.range(1, 4);
    c.metric_params.meteor_gamma = g.real(0.0, 1.0);
    const std::string text = to_toml(c);
    const RunConfig back = parse_config(text, termbt::testing::source_dir() / "configs");
    ASSERT_TRUE(back == c) << text;
    ASSERT_EQ(to_toml(back), text);
  }
}
