#include <gtest/gtest.h>

#include "support.hpp"
#include "termbt/config.hpp"
#include "termbt/core.hpp"
#include "termbt/digest.hpp"
#include "termbt/error.hpp"

using namespace termbt;
using termbt::testing::config_from;

namespace {

BtPath hops(std::vector<std::pair<std::string, std::string>> pairs, Topology topo = Topology::Serial) {
  BtPath p;
  p.topology = topo;
  p.label = "p";
  for (auto& [from, to] : pairs) p.hops.push_back(Hop{LangTag::parse(from), LangTag::parse(to), "id"});
  return p;
}

std::string error_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"(
label = "t"
[source]
text = "Deep residual learning."
[[providers.translation]]
id = "id"
kind = "identity"
)";

}  // namespace

TEST(LangTag, CanonicalizesCase) {
  EXPECT_EQ(LangTag::parse("ZH-CN").code(), "zh-cn");
  EXPECT_EQ(LangTag::parse("pt-BR"), LangTag::parse("pt-br"));
  EXPECT_EQ(LangTag::parse("en").code(), "en");
}

TEST(LangTag, RejectsMalformed) {
  for (const char* raw : {"", "zh_cn", "zh-", "-cn", "e1", "zh-cn-x", "日本"}) {
    EXPECT_FALSE(LangTag::valid(raw)) << raw;
    EXPECT_THROW(LangTag::parse(raw), ConfigError) << raw;
  }
}

TEST(Document, SourceHasInputOrigin) {
  const Document d = Document::source("text", LangTag::parse("en"));
  EXPECT_EQ(d.stage, Stage::Source);
  EXPECT_EQ(d.origin.provider, "input");
  EXPECT_FALSE(d.origin.parent.has_value());
}

TEST(Document, EmptySourceIsRejected) {
  try {
    Document::source("", LangTag::parse("en"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Precondition);
  }
}

TEST(Document, DeriveLinksParent) {
  const Document src = Document::source("text", LangTag::parse("en"));
  const Document child = src.derive("texte", LangTag::parse("fr"), Stage::Intermediate, "mt");
  EXPECT_EQ(child.origin.parent, src.id);
  EXPECT_EQ(child.origin.provider, "mt");
  EXPECT_NE(child.id, src.id);
}

TEST(ValidatePath, AcceptsExamples) {
  EXPECT_NO_THROW(validate_path(hops({{"en", "pt-br"}, {"pt-br", "en"}}, Topology::Parallel)));
  EXPECT_NO_THROW(validate_path(hops({{"en", "zh-cn"}, {"zh-cn", "zh-tw"}, {"zh-tw", "en"}})));
}

TEST(ValidatePath, EmptyHopsRejected) { EXPECT_THROW(validate_path(hops({})), PathError); }

TEST(ValidatePath, ChainBreakNamesHop) {
  const auto msg = error_message([] { validate_path(hops({{"en", "zh-cn"}, {"ja", "en"}})); });
  EXPECT_NE(msg.find("chain break at hop 2"), std::string::npos) << msg;
}

TEST(ValidatePath, ParallelNeedsTwoHops) {
  EXPECT_THROW(validate_path(hops({{"en", "zh-cn"}, {"zh-cn", "ja"}, {"ja", "en"}}, Topology::Parallel)), PathError);
}

TEST(ValidatePath, MustCloseOnSource) {
  EXPECT_THROW(validate_path(hops({{"en", "zh-cn"}, {"zh-cn", "ja"}})), PathError);
}

TEST(MakePath, TopologyFromHopCount) {
  const auto en = LangTag::parse("en"), cn = LangTag::parse("zh-cn"), tw = LangTag::parse("zh-tw");
  EXPECT_EQ(make_path("a", {en, cn, en}, {"f", "b"}).topology, Topology::Parallel);
  const BtPath serial = make_path("b", {en, cn, tw, en}, {"x", "y", "z"});
  EXPECT_EQ(serial.topology, Topology::Serial);
  EXPECT_EQ(serial.hops.size(), 3u);
  EXPECT_EQ(serial.intermediate_langs(), (std::vector<LangTag>{cn, tw}));
  EXPECT_THROW(make_path("c", {en, cn, en}, {"only-one"}), PathError);
}

TEST(Config, TwoHopRouteIsParallel) {
  const RunConfig c = config_from(std::string(kMinimal) + R"(
[[paths]]
route = ["en", "zh-cn", "en"]
providers = ["id", "id"]
)");
  ASSERT_EQ(c.paths.size(), 1u);
  EXPECT_EQ(c.paths[0].topology, Topology::Parallel);
  EXPECT_EQ(c.paths[0].hops.size(), 2u);
  EXPECT_EQ(c.paths[0].label, "en>zh-cn>en");
}

TEST(Config, ThreeHopRouteIsSerial) {
  const RunConfig c = config_from(std::string(kMinimal) + R"(
[[paths]]
route = ["en", "zh-cn", "zh-tw", "en"]
providers = ["id", "id", "id"]
)");
  ASSERT_EQ(c.paths.size(), 1u);
  EXPECT_EQ(c.paths[0].topology, Topology::Serial);
  EXPECT_EQ(c.paths[0].hops.size(), 3u);
}

TEST(Config, ExplicitHopsWithChainBreak) {
  const auto msg = error_message([] {
    config_from(std::string(kMinimal) + R"(
[[paths]]
hops = [ { from = "en", to = "zh-cn", provider = "id" }, { from = "ja", to = "en", provider = "id" } ]
)");
  });
  EXPECT_NE(msg.find("chain break at hop 2"), std::string::npos) << msg;
}

TEST(Config, SyntaxErrorCarriesPosition) {
  try {
    config_from("label = \"x\"\nseed = = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("2:"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownProviderNamed) {
  const auto msg = error_message([] {
    config_from(std::string(kMinimal) + R"(
[[paths]]
route = ["en", "zh-cn", "en"]
providers = ["id", "nope"]
)");
  });
  EXPECT_NE(msg.find("nope"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(config_from(std::string(kMinimal) + "colour = 1\n[[paths]]\nroute=[\"en\",\"fr\",\"en\"]\nproviders=[\"id\",\"id\"]\n"),
               ConfigError);
}

TEST(Config, NoPathsRejected) { EXPECT_THROW(config_from(kMinimal), Error); }

TEST(Config, PathMustStartAtSource) {
  EXPECT_THROW(config_from(std::string(kMinimal) + R"(
[[paths]]
route = ["fr", "en", "fr"]
providers = ["id", "id"]
)"),
               PathError);
}

TEST(Config, RoundTripsShippedConfigs) {
  for (const char* name : {"he2016.toml", "dy2023.toml", "he2016-serial.toml", "he2016-swap2.toml"}) {
    const RunConfig c = load_config(termbt::testing::source_dir() / "configs" / name);
    const RunConfig back = parse_config(to_toml(c), "/");
    EXPECT_EQ(back, c) << name;
  }
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(load_config("/nonexistent/config.toml"), ConfigError);
}

TEST(Config, ApplySeedOverrides) {
  RunConfig c = load_config(termbt::testing::source_dir() / "configs" / "he2016.toml");
  EXPECT_EQ(c.seed, 7u);
  apply_seed(c, 99);
  EXPECT_EQ(c.seed, 99u);
}

TEST(Errors, StableCodeNames) {
  EXPECT_STREQ(code_name(ErrorCode::Config), "E_CONFIG");
  EXPECT_STREQ(code_name(ErrorCode::RateLimited), "E_RATE_LIMITED");
}

TEST(Digest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
