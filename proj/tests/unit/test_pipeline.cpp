#include <fmt/format.h>
#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "termbt/error.hpp"
#include "termbt/pipeline.hpp"
#include "termbt/textmetrics.hpp"

using namespace termbt;
using namespace termbt::pipeline;
using termbt::testing::config_from;
using termbt::testing::FakeTransport;
using termbt::testing::TempDir;

namespace {

std::string identity_config(const std::string& fixture, const std::string& extra_paths = "") {
  return fmt::format(R"(
label = "identity-{0}"
seed = 1
cache_dir = "/tmp/termbt-unused-cache"
[source]
fixture = "{0}"
[[providers.translation]]
id = "identity"
kind = "identity"
[[fanout]]
via = ["zh-cn", "zh-tw"]
forward = "identity"
back = "identity"
{1}
[embedder]
synonyms_fixture = "{0}"
[extraction]
lexicon_fixtures = ["{0}"]
)",
                     fixture, extra_paths);
}

RunOptions fixed_options() {
  RunOptions o;
  o.run_id = "run-test";
  o.timestamp = "2026-01-01T00:00:00Z";
  return o;
}

std::string path_json(const RunResult& r, const std::string& label) {
  const auto j = strip_volatile(to_json(r));
  for (const auto& p : j["paths"]) {
    if (p["label"] == label) return p.dump();
  }
  return "";
}

std::string echo_user(const std::string& body, int) {
  const auto j = nlohmann::json::parse(body);
  return termbt::testing::chat_reply(j["messages"][1]["content"].get<std::string>());
}

}  // namespace

TEST(Pipeline, IdentityRoundTripEveryFixture) {
  for (const char* fixture : {"he2016", "dy2023", "ling2025-terms"}) {
    const RunConfig c = config_from(identity_config(fixture));
    const RunResult r = run(c, fixed_options());
    ASSERT_EQ(r.exit_code(), 0) << fixture;
    const double n = static_cast<double>(textmetrics::tokenize(c.source.text, c.metric_params.tokenizer).size());
    for (const auto& p : r.paths) {
      ASSERT_TRUE(p.ok()) << fixture << " " << p.path.label;
      EXPECT_EQ(p.documents.back().text, c.source.text);
      EXPECT_DOUBLE_EQ(p.text_scores->bleu.score, 1.0);
      EXPECT_EQ(p.text_scores->ter.score, 0.0);
      EXPECT_NEAR(p.text_scores->meteor.score, 1.0 - 0.5 * std::pow(1.0 / n, 3), 1e-12);
      EXPECT_NEAR(p.text_scores->semantic.f1, 1.0, 1e-12);
      EXPECT_EQ(p.report->emr, 100.0);
      EXPECT_EQ(p.report->smr, 100.0);
      EXPECT_EQ(p.report->irs_mean, 1.0);
      EXPECT_EQ(p.report->tdi, 0.0);
    }
    ASSERT_FALSE(r.recommendations.entries.empty()) << fixture;
    for (const auto& e : r.recommendations.entries) {
      EXPECT_EQ(e.status, recommend::Status::Standardized) << fixture << " " << e.en_term;
    }
  }
}

TEST(Pipeline, TwoHopPathEndsInSourceLanguage) {
  const RunResult r = run(config_from(identity_config("he2016")), fixed_options());
  for (const auto& p : r.paths) {
    ASSERT_EQ(p.documents.size(), 2u);
    EXPECT_EQ(p.documents.back().lang, LangTag::parse("en"));
    EXPECT_EQ(p.documents.back().stage, Stage::BackTranslated);
    EXPECT_EQ(p.documents.front().stage, Stage::Intermediate);
  }
}

TEST(Pipeline, SerialHopProvenance) {
  const RunConfig c = config_from(R"(
[source]
fixture = "he2016"
[[providers.translation]]
id = "first"
kind = "identity"
[[providers.translation]]
id = "second"
kind = "perturbation"
rules = ["nets => networks"]
[[providers.translation]]
id = "third"
kind = "identity"
[[paths]]
route = ["en", "zh-cn", "zh-tw", "en"]
providers = ["first", "second", "third"]
[embedder]
synonyms_fixture = "he2016"
[extraction]
lexicon_fixtures = ["he2016"]
)");
  const RunResult r = run(c, fixed_options());
  ASSERT_EQ(r.paths.size(), 1u);
  const auto& docs = r.paths[0].documents;
  ASSERT_EQ(docs.size(), 3u);
  // walk the parent chain back to the source
  std::string parent = r.source.id;
  const std::vector<std::string> expected = {"first", "second", "third"};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EXPECT_EQ(docs[i].origin.provider, expected[i]);
    EXPECT_EQ(docs[i].origin.parent, parent);
    EXPECT_EQ(docs[i].lang, c.paths[0].hops[i].to);
    parent = docs[i].id;
  }
  EXPECT_EQ(r.paths[0].intermediate_terms.size(), 2u);
}

TEST(Pipeline, RunSerialChecksPath) {
  const RunConfig c = config_from(identity_config("he2016"));
  const Bindings b = build_bindings(c);
  BtPath broken = c.paths[0];
  broken.hops[1].from = LangTag::parse("ja");
  EXPECT_THROW(run_serial(broken, c.source, b), PathError);
  EXPECT_THROW(b.translator("missing"), ConfigError);
}

TEST(Pipeline, FaultIsolationAndExitCodes) {
  const std::string fault = R"(
[[providers.translation]]
id = "broken"
kind = "fault"
message = "scripted failure"
[[paths]]
label = "ENja"
route = ["en", "ja", "en"]
providers = ["broken", "identity"]
)";
  const RunResult healthy = run(config_from(identity_config("he2016")), fixed_options());
  const RunResult partial = run(config_from(identity_config("he2016", fault)), fixed_options());
  EXPECT_EQ(healthy.exit_code(), 0);
  EXPECT_EQ(partial.exit_code(), 3);
  EXPECT_EQ(partial.failed_paths(), 1u);
  ASSERT_EQ(partial.paths.size(), 3u);
  const auto& failed = partial.paths[0].path.label == "ENja" ? partial.paths[0] : partial.paths[2];
  ASSERT_FALSE(failed.ok());
  EXPECT_EQ(failed.failure->code, "E_REFUSAL");
  EXPECT_EQ(failed.failure->provider, "broken");
  EXPECT_EQ(failed.failure->hop, 0u);
  for (const char* label : {"zh-cn", "zh-tw"}) EXPECT_EQ(path_json(partial, label), path_json(healthy, label)) << label;

  const RunConfig all_bad = config_from(R"(
[source]
text = "Deep residual nets."
[[providers.translation]]
id = "broken"
kind = "fault"
[[paths]]
route = ["en", "ja", "en"]
providers = ["broken", "broken"]
)");
  const RunResult none = run(all_bad, fixed_options());
  EXPECT_EQ(none.exit_code(), 1);
  EXPECT_TRUE(none.confidence.empty());
}

TEST(Pipeline, CrossPathConfidence) {
  auto path = [](const std::string& label, bool exact, double score) {
    PathResult p;
    p.path.label = label;
    consistency::TermRecord r{termbt::testing::make_term("x")};
    r.en = termbt::testing::make_term("neural network");
    r.eny = r.en;
    r.exact_match = exact;
    r.semantic_match = true;
    r.semantic_score = score;
    p.report = consistency::compute_report(label, {r}, {}, std::nullopt);
    return p;
  };
  const auto single = cross_path_consistency({path("A", true, 1.0)});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].confidence, 1.0);
  const auto two = cross_path_consistency({path("A", true, 1.0), path("B", false, 0.8)});
  ASSERT_EQ(two.size(), 1u);
  EXPECT_NEAR(two[0].confidence, 0.70, 1e-12);
  ASSERT_EQ(two[0].observations.size(), 2u);

  PathResult failed;
  failed.failure = PathFailure{"E_REFUSAL", "x", "p", 0, 1};
  try {
    cross_path_consistency({failed});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Precondition);
  }
}

TEST(Pipeline, ConfidenceOrderingFollowsPathEmr) {
  const RunResult r = run(load_config(termbt::testing::source_dir() / "configs" / "he2016.toml"), fixed_options());
  ASSERT_EQ(r.exit_code(), 0);
  for (std::size_t i = 1; i < r.confidence.size(); ++i) {
    EXPECT_LE(r.confidence[i - 1].confidence, r.confidence[i].confidence);
  }
  // terms exact on both paths rank at the top with confidence 1
  EXPECT_EQ(r.confidence.back().confidence, 1.0);
}

TEST(Pipeline, ReplayDeterminism) {
  const RunConfig c = load_config(termbt::testing::source_dir() / "configs" / "he2016.toml");
  RunOptions a, b;  // random run ids and real timestamps
  const std::string first = strip_volatile(to_json(run(c, a))).dump(2);
  const std::string second = strip_volatile(to_json(run(c, b))).dump(2);
  EXPECT_EQ(first, second);
}

TEST(Pipeline, StripVolatileAtAnyDepth) {
  nlohmann::ordered_json j = {{"run_id", "x"}, {"a", {{"timings_ms", {{"t", 1}}}, {"keep", 1}}}, {"list", {{{"timestamp", "t"}}}}};
  const auto s = strip_volatile(j);
  EXPECT_EQ(s.dump(), R"({"a":{"keep":1},"list":[{}]})");
}

TEST(Pipeline, WarmCacheMakesNoNetworkCalls) {
  TempDir dir;
  const std::string cfg = fmt::format(R"(
cache_dir = "{}"
[source]
fixture = "he2016"
[endpoints.mt]
base_url = "http://mt.invalid"
model = "echo-1"
rate_per_second = 1000.0
[[providers.translation]]
id = "live"
kind = "live"
endpoint = "mt"
[[paths]]
label = "ENcn"
route = ["en", "zh-cn", "en"]
providers = ["live", "live"]
[extraction]
lexicon_fixtures = ["he2016"]
)",
                                      (dir / "cache").string());
  const RunConfig c = config_from(cfg);

  auto cold_transport = std::make_shared<FakeTransport>([](const std::string& body, int n) {
    return HttpResponse{200, echo_user(body, n), {}};
  });
  RunOptions cold = fixed_options();
  cold.transport_factory = [&](const std::string&, const EndpointSpec&) { return cold_transport; };
  const Bindings cold_bindings = build_bindings(c, cold);
  const RunResult first = run(c, cold_bindings, cold);
  ASSERT_EQ(first.exit_code(), 0);
  EXPECT_EQ(cold_transport->calls(), 2);
  EXPECT_EQ(cold_bindings.network_calls(), 2u);

  auto warm_transport = std::make_shared<FakeTransport>([](const std::string&, int) { return HttpResponse{500, "", {}}; });
  RunOptions warm = fixed_options();
  warm.transport_factory = [&](const std::string&, const EndpointSpec&) { return warm_transport; };
  const Bindings warm_bindings = build_bindings(c, warm);
  const RunResult second = run(c, warm_bindings, warm);
  EXPECT_EQ(warm_transport->calls(), 0);
  EXPECT_EQ(warm_bindings.network_calls(), 0u);
  EXPECT_EQ(strip_volatile(to_json(first)).dump(), strip_volatile(to_json(second)).dump());

  // offline with an empty cache fails the path instead of reaching the network
  TempDir empty;
  RunConfig cold_config = c;
  cold_config.cache_dir = empty.path();
  RunOptions offline = warm;
  offline.offline = true;
  const RunResult third = run(cold_config, offline);
  EXPECT_EQ(third.exit_code(), 1);
  EXPECT_EQ(warm_transport->calls(), 0);
  EXPECT_EQ(third.paths[0].failure->code, "E_TRANSPORT");
}

TEST(Pipeline, SerializedShape) {
  const RunResult r = run(config_from(identity_config("he2016")), fixed_options());
  const auto j = to_json(r);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["run_id"], "run-test");
  EXPECT_EQ(j["paths"].size(), 2u);
  EXPECT_EQ(j["paths"][0]["status"], "ok");
  EXPECT_TRUE(j["paths"][0]["consistency"].contains("emr"));
  EXPECT_EQ(serialize(r).back(), '\n');
}

TEST(Pipeline, IntermediateLexiconIncludesSourceEntries) {
  terms::TermLexicon lex;
  lex.add(LangTag::parse("en"), "imagenet");
  lex.add(LangTag::parse("zh-cn"), "残差网络");
  lex.add(LangTag::parse("ja"), "ネット");
  const auto out = intermediate_lexicon(lex, LangTag::parse("zh-cn"), LangTag::parse("en"));
  EXPECT_TRUE(out.contains(LangTag::parse("zh-cn"), "imagenet"));
  EXPECT_TRUE(out.contains(LangTag::parse("zh-cn"), "残差网络"));
  EXPECT_FALSE(out.contains(LangTag::parse("zh-cn"), "ネット"));
}
