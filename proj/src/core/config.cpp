#include "termbt/config.hpp"

#include <fmt/format.h>

#include <limits>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "termbt/error.hpp"
#include "termbt/extraction.hpp"
#include "termbt/fixtures.hpp"
#include "termbt/lexicon.hpp"

namespace termbt {

namespace {

// Wraps one TOML table; every key read is remembered so leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const toml::table& table, std::string context) : table_(table), context_(std::move(context)) {}

  const std::string& context() const { return context_; }
  bool has(std::string_view key) const { return table_.contains(key); }

  std::string where(std::string_view key) const {
    return context_.empty() ? std::string(key) : fmt::format("{}.{}", context_, key);
  }

  const toml::node* node(std::string_view key) {
    used_.insert(std::string(key));
    return table_.get(key);
  }

  std::optional<std::string> str(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return std::nullopt;
    if (!n->is_string()) fail(key, "expected a string");
    return n->value<std::string>();
  }

  std::string str_or(std::string_view key, std::string fallback) { return str(key).value_or(std::move(fallback)); }

  std::string required_str(std::string_view key) {
    auto v = str(key);
    if (!v) throw ConfigError(fmt::format("missing required key '{}'", where(key)));
    return *v;
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return std::nullopt;
    if (!n->is_integer()) fail(key, "expected an integer");
    return n->value<std::int64_t>();
  }

  std::optional<double> real(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return std::nullopt;
    if (n->is_integer()) return static_cast<double>(*n->value<std::int64_t>());
    if (!n->is_floating_point()) fail(key, "expected a number");
    return n->value<double>();
  }

  std::optional<bool> boolean(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return std::nullopt;
    if (!n->is_boolean()) fail(key, "expected true or false");
    return n->value<bool>();
  }

  std::optional<std::vector<std::string>> strings(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (arr == nullptr) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const toml::node& item : *arr) {
      if (!item.is_string()) fail(key, "expected an array of strings");
      out.push_back(*item.value<std::string>());
    }
    return out;
  }

  std::optional<std::vector<double>> reals(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (arr == nullptr) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const toml::node& item : *arr) {
      if (item.is_integer()) out.push_back(static_cast<double>(*item.value<std::int64_t>()));
      else if (item.is_floating_point()) out.push_back(*item.value<double>());
      else fail(key, "expected an array of numbers");
    }
    return out;
  }

  const toml::table* table(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return nullptr;
    if (!n->is_table()) fail(key, "expected a table");
    return n->as_table();
  }

  const toml::array* tables(std::string_view key) {
    const toml::node* n = node(key);
    if (n == nullptr) return nullptr;
    const toml::array* arr = n->as_array();
    if (arr == nullptr || !arr->is_array_of_tables()) fail(key, "expected an array of tables");
    return arr;
  }

  void finish() const {
    for (auto&& [k, v] : table_) {
      if (!used_.count(std::string(k.str()))) {
        const auto& src = v.source();
        throw ConfigError(fmt::format("unknown key '{}' at line {}", where(k.str()), src.begin.line));
      }
    }
  }

  [[noreturn]] void fail(std::string_view key, std::string_view what) const {
    const toml::node* n = table_.get(key);
    const auto line = n != nullptr ? n->source().begin.line : 0;
    throw ConfigError(fmt::format("'{}' at line {}: {}", where(key), line, what));
  }

 private:
  const toml::table& table_;
  std::string context_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& raw) {
  std::filesystem::path p(raw);
  if (p.is_relative()) p = base / p;
  return std::filesystem::absolute(p).lexically_normal();
}

TranslationKind translation_kind_from_string(std::string_view raw) {
  if (raw == "identity") return TranslationKind::Identity;
  if (raw == "perturbation") return TranslationKind::Perturbation;
  if (raw == "live") return TranslationKind::LiveLLM;
  if (raw == "fault") return TranslationKind::Fault;
  throw ConfigError(fmt::format("unknown translation provider kind '{}'", raw));
}

std::string_view to_string(ExtractionKind kind) {
  return kind == ExtractionKind::PromptedLLM ? "prompted" : "rule-based";
}

ExtractionKind extraction_kind_from_string(std::string_view raw) {
  if (raw == "prompted") return ExtractionKind::PromptedLLM;
  if (raw == "rule-based") return ExtractionKind::RuleBased;
  throw ConfigError(fmt::format("unknown extraction provider kind '{}'", raw));
}

std::string_view to_string(ExtractionMode mode) { return mode == ExtractionMode::Terms ? "terms" : "triples"; }

ExtractionMode extraction_mode_from_string(std::string_view raw) {
  if (raw == "terms") return ExtractionMode::Terms;
  if (raw == "triples") return ExtractionMode::Triples;
  throw ConfigError(fmt::format("unknown extraction mode '{}' (expected terms or triples)", raw));
}

std::uint64_t non_negative(std::int64_t v, std::string_view key) {
  if (v < 0) throw ConfigError(fmt::format("'{}' must be non-negative, got {}", key, v));
  return static_cast<std::uint64_t>(v);
}

SourceSpec read_source(Reader& r, const std::filesystem::path& base) {
  SourceSpec spec;
  const toml::table* t = r.table("source");
  if (t == nullptr) throw ConfigError("missing required table 'source'");
  Reader s(*t, "source");
  if (auto lang = s.str("lang")) spec.lang = LangTag::parse(*lang);
  int given = 0;
  if (auto v = s.str("fixture")) {
    spec.kind = SourceKind::Fixture;
    spec.value = *v;
    ++given;
  }
  if (auto v = s.str("file")) {
    spec.kind = SourceKind::File;
    spec.value = resolve(base, *v).string();
    ++given;
  }
  if (auto v = s.str("text")) {
    spec.kind = SourceKind::Text;
    spec.value = *v;
    ++given;
  }
  if (given != 1) throw ConfigError("'source' needs exactly one of fixture, file or text");
  s.finish();
  return spec;
}

EndpointSpec read_endpoint(const toml::table& t, const std::string& name) {
  Reader r(t, "endpoints." + name);
  EndpointSpec e;
  e.name = name;
  e.base_url = r.required_str("base_url");
  e.path = r.str_or("path", e.path);
  e.model = r.required_str("model");
  e.token_env = r.str_or("token_env", "");
  e.response_path = r.str_or("response_path", e.response_path);
  if (auto v = r.real("rate_per_second")) e.rate_per_second = *v;
  if (auto v = r.integer("max_attempts")) e.max_attempts = static_cast<int>(*v);
  if (auto v = r.integer("initial_backoff_ms")) e.initial_backoff_ms = static_cast<int>(*v);
  if (auto v = r.integer("timeout_seconds")) e.timeout_seconds = static_cast<int>(*v);
  if (auto v = r.real("temperature")) e.temperature = *v;
  r.finish();
  if (!(e.rate_per_second > 0.0)) throw ConfigError(fmt::format("endpoint '{}': rate_per_second must be positive", name));
  if (e.max_attempts < 1) throw ConfigError(fmt::format("endpoint '{}': max_attempts must be at least 1", name));
  if (e.initial_backoff_ms < 0 || e.timeout_seconds <= 0) {
    throw ConfigError(fmt::format("endpoint '{}': backoff and timeout must be positive", name));
  }
  return e;
}

TranslationSpec read_translation(const toml::table& t, std::size_t index, const std::filesystem::path& base) {
  Reader r(t, fmt::format("providers.translation[{}]", index));
  TranslationSpec spec;
  spec.id = r.required_str("id");
  spec.kind = translation_kind_from_string(r.required_str("kind"));
  if (auto v = r.str("substitutions")) spec.substitutions = resolve(base, *v);
  if (auto v = r.strings("rules")) spec.rules = *v;
  if (const toml::table* rt = r.table("replay")) {
    Reader rr(*rt, r.where("replay"));
    ReplaySpec replay;
    replay.fixture = rr.required_str("fixture");
    replay.lang = LangTag::parse(rr.required_str("lang"));
    replay.direction = rr.required_str("direction");
    fixtures::replay_direction_from_string(replay.direction);
    rr.finish();
    spec.replay = replay;
  }
  if (auto v = r.real("omission_probability")) spec.omission_probability = *v;
  if (auto v = r.integer("seed")) spec.seed = non_negative(*v, r.where("seed"));
  spec.endpoint = r.str_or("endpoint", "");
  spec.prompt = r.str_or("prompt", spec.prompt);
  spec.message = r.str_or("message", spec.message);
  r.finish();
  if (!(spec.omission_probability >= 0.0 && spec.omission_probability <= 1.0)) {
    throw ConfigError(fmt::format("provider '{}': omission_probability must be in [0, 1]", spec.id));
  }
  if (spec.kind == TranslationKind::LiveLLM && spec.endpoint.empty()) {
    throw ConfigError(fmt::format("live provider '{}' needs an endpoint", spec.id));
  }
  const bool perturb_only = spec.substitutions || !spec.rules.empty() || spec.replay || spec.omission_probability > 0.0;
  if (perturb_only && spec.kind != TranslationKind::Perturbation) {
    throw ConfigError(fmt::format("provider '{}': substitution settings apply to perturbation providers only", spec.id));
  }
  for (const std::string& rule : spec.rules) SubstitutionLexicon::parse(rule, spec.id);
  return spec;
}

ExtractionSpec read_extraction_provider(const toml::table& t, std::size_t index) {
  Reader r(t, fmt::format("providers.extraction[{}]", index));
  ExtractionSpec spec;
  spec.id = r.required_str("id");
  spec.kind = extraction_kind_from_string(r.required_str("kind"));
  spec.endpoint = r.str_or("endpoint", "");
  spec.canned_response = r.str("canned_response");
  spec.prompt = r.str_or("prompt", spec.prompt);
  if (auto v = r.str("mode")) spec.mode = extraction_mode_from_string(*v);
  r.finish();
  if (spec.kind == ExtractionKind::PromptedLLM && spec.endpoint.empty() && !spec.canned_response) {
    throw ConfigError(fmt::format("prompted extractor '{}' needs an endpoint or a canned_response", spec.id));
  }
  return spec;
}

BtPath read_path(const toml::table& t, std::size_t index, const LangTag& source_lang) {
  Reader r(t, fmt::format("paths[{}]", index));
  auto label = r.str("label");
  auto topology = r.str("topology");
  BtPath path;
  if (r.has("route")) {
    const auto route = *r.strings("route");
    const auto providers = r.strings("providers").value_or(std::vector<std::string>{});
    std::vector<LangTag> langs;
    for (const auto& code : route) langs.push_back(LangTag::parse(code));
    path = make_path(label.value_or(""), langs, providers);
  } else if (const toml::array* hops = r.tables("hops")) {
    std::size_t h = 0;
    for (const toml::node& n : *hops) {
      Reader hr(*n.as_table(), fmt::format("{}.hops[{}]", r.context(), h++));
      path.hops.push_back(Hop{LangTag::parse(hr.required_str("from")), LangTag::parse(hr.required_str("to")),
                              hr.required_str("provider")});
      hr.finish();
    }
    path.topology = path.hops.size() == 2 ? Topology::Parallel : Topology::Serial;
  } else {
    throw ConfigError(fmt::format("'{}' needs either route + providers or hops", r.context()));
  }
  r.finish();
  if (topology) path.topology = topology_from_string(*topology);
  if (label) {
    path.label = *label;
  } else {
    std::vector<std::string> codes{path.hops.empty() ? std::string() : path.hops.front().from.code()};
    for (const Hop& hop : path.hops) codes.push_back(hop.to.code());
    path.label = fmt::format("{}", fmt::join(codes, ">"));
  }
  validate_path(path);
  if (path.source_lang() != source_lang) {
    throw PathError(fmt::format("path '{}': starts at '{}' but the source is '{}'", path.label,
                                path.source_lang().code(), source_lang.code()));
  }
  return path;
}

// Parallel fan-out shorthand: one two-hop path per intermediate language.
std::vector<BtPath> read_fanout(const toml::table& t, std::size_t index, const LangTag& source_lang) {
  Reader r(t, fmt::format("fanout[{}]", index));
  const auto via = r.strings("via");
  if (!via || via->empty()) throw ConfigError(fmt::format("'{}' needs a non-empty 'via' list", r.context()));
  const std::string forward = r.required_str("forward");
  const std::string back = r.required_str("back");
  const std::string prefix = r.str_or("label_prefix", "");
  r.finish();
  std::vector<BtPath> out;
  for (const auto& code : *via) {
    LangTag lang = LangTag::parse(code);
    out.push_back(make_path(prefix + lang.code(), {source_lang, lang, source_lang}, {forward, back}));
  }
  return out;
}

void read_metrics(Reader& root, textmetrics::MetricParams& m) {
  const toml::table* t = root.table("metrics");
  if (t == nullptr) return;
  Reader r(*t, "metrics");
  if (auto v = r.integer("bleu_max_n")) m.bleu_max_n = static_cast<int>(*v);
  if (auto v = r.reals("bleu_weights")) m.bleu_weights = *v;
  if (auto v = r.real("meteor_alpha")) m.meteor_alpha = *v;
  if (auto v = r.real("meteor_gamma")) m.meteor_gamma = *v;
  if (auto v = r.str("tokenizer")) m.tokenizer = textmetrics::tokenizer_from_string(*v);
  if (auto v = r.str("zero_ngram_policy")) m.zero_ngram_policy = textmetrics::zero_ngram_policy_from_string(*v);
  if (auto v = r.real("floor_epsilon")) m.floor_epsilon = *v;
  if (auto v = r.str("meteor_form")) m.meteor_form = textmetrics::meteor_form_from_string(*v);
  r.finish();
}

void read_thresholds(Reader& root, recommend::Thresholds& th) {
  const toml::table* t = root.table("thresholds");
  if (t == nullptr) return;
  Reader r(*t, "thresholds");
  if (auto v = r.real("irs_low")) th.irs_low = *v;
  if (auto v = r.integer("top_k")) th.top_k = static_cast<int>(*v);
  if (auto v = r.real("tau_sem")) th.tau_sem = *v;
  if (auto v = r.real("tau_align")) th.tau_align = *v;
  r.finish();
}

void check_references(const RunConfig& c) {
  std::set<std::string> ids;
  for (const auto& t : c.translation) {
    if (!ids.insert(t.id).second) throw ConfigError(fmt::format("duplicate translation provider id '{}'", t.id));
  }
  std::set<std::string> ext_ids;
  for (const auto& e : c.extraction_providers) {
    if (!ext_ids.insert(e.id).second) throw ConfigError(fmt::format("duplicate extraction provider id '{}'", e.id));
  }
  const auto prompts = c.effective_prompts();
  auto need_endpoint = [&](const std::string& name, const std::string& who) {
    if (!name.empty() && !c.endpoints.count(name)) {
      throw ConfigError(fmt::format("{} refers to unknown endpoint '{}'", who, name));
    }
  };
  auto need_prompt = [&](const std::string& name, const std::string& who) {
    if (!prompts.count(name)) throw ConfigError(fmt::format("{} refers to unknown prompt '{}'", who, name));
  };
  for (const auto& t : c.translation) {
    need_endpoint(t.endpoint, fmt::format("provider '{}'", t.id));
    if (t.kind == TranslationKind::LiveLLM) need_prompt(t.prompt, fmt::format("provider '{}'", t.id));
    if (t.replay) {
      const auto& names = fixtures::fixture_names();
      if (std::find(names.begin(), names.end(), t.replay->fixture) == names.end()) {
        throw ConfigError(fmt::format("provider '{}' replays unknown fixture '{}'", t.id, t.replay->fixture));
      }
    }
  }
  for (const auto& e : c.extraction_providers) {
    need_endpoint(e.endpoint, fmt::format("extractor '{}'", e.id));
    if (e.kind == ExtractionKind::PromptedLLM) need_prompt(e.prompt, fmt::format("extractor '{}'", e.id));
  }
  if (c.embedder.kind == "live") {
    if (c.embedder.endpoint.empty()) throw ConfigError("live embedder needs an endpoint");
    need_endpoint(c.embedder.endpoint, "embedder");
  }
  if (c.paths.empty()) throw ConfigError("at least one path is required");
  std::set<std::string> labels;
  for (const BtPath& p : c.paths) {
    if (!labels.insert(p.label).second) throw ConfigError(fmt::format("duplicate path label '{}'", p.label));
    for (const Hop& h : p.hops) {
      if (!c.find_translation(h.provider)) {
        throw ConfigError(fmt::format("path '{}' refers to unknown provider id '{}'", p.label, h.provider));
      }
    }
  }
  const auto& ex = c.extraction;
  if (ex.strategy != terms::Strategy::RuleBased && !ex.provider) {
    throw ConfigError(fmt::format("extraction strategy '{}' needs extraction.provider", terms::to_string(ex.strategy)));
  }
  if (ex.provider && !c.find_extraction(*ex.provider)) {
    throw ConfigError(fmt::format("extraction.provider refers to unknown provider id '{}'", *ex.provider));
  }
  if (c.parallelism < 1) throw ConfigError("pipeline.parallelism must be at least 1");
  if (c.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw ConfigError("seed does not fit a TOML integer");
  }
}

std::string label_line(const toml::source_region& src) {
  return fmt::format("{}:{}", src.begin.line, src.begin.column);
}

}  // namespace

const TranslationSpec* RunConfig::find_translation(std::string_view id) const {
  for (const auto& t : translation) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const ExtractionSpec* RunConfig::find_extraction(std::string_view id) const {
  for (const auto& e : extraction_providers) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::map<std::string, PromptTemplate> RunConfig::effective_prompts() const {
  std::map<std::string, PromptTemplate> out = builtin_prompts();
  for (const auto& [name, p] : prompts) out[name] = p;
  return out;
}

Document resolve_source(const SourceSpec& spec) {
  switch (spec.kind) {
    case SourceKind::Fixture: {
      const fixtures::FixtureSet f = fixtures::load_fixture(spec.value);
      if (f.source_excerpt.lang != spec.lang) {
        throw ConfigError(fmt::format("source lang '{}' does not match fixture '{}' ({})", spec.lang.code(), spec.value,
                                      f.source_excerpt.lang.code()));
      }
      return Document::source(fixtures::probe_text(f), f.source_excerpt.lang);
    }
    case SourceKind::File: {
      std::string text = read_text_file(spec.value);
      if (text.empty()) throw Error(ErrorCode::Precondition, fmt::format("source file '{}' is empty", spec.value));
      return Document::source(std::move(text), spec.lang);
    }
    case SourceKind::Text:
      if (spec.value.empty()) throw Error(ErrorCode::Precondition, "source text is empty");
      return Document::source(spec.value, spec.lang);
  }
  throw ConfigError("unknown source kind");
}

RunConfig parse_config(std::string_view raw, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(raw, std::string_view("config"));
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("syntax error at {}: {}", label_line(e.source()), e.description()));
  }
  Reader r(root, "");
  const auto version = r.integer("schema_version").value_or(kConfigSchemaVersion);
  if (version != kConfigSchemaVersion) {
    throw ConfigError(fmt::format("unsupported schema_version {} (expected {})", version, kConfigSchemaVersion));
  }
  SourceSpec spec = read_source(r, base_dir);
  RunConfig c(spec, resolve_source(spec));
  c.label = r.str_or("label", "");
  if (auto v = r.integer("seed")) c.seed = non_negative(*v, "seed");
  if (auto v = r.str("cache_dir")) c.cache_dir = resolve(base_dir, *v);
  else c.cache_dir = resolve(base_dir, c.cache_dir.string());

  if (const toml::table* eps = r.table("endpoints")) {
    for (auto&& [name, node] : *eps) {
      if (!node.is_table()) throw ConfigError(fmt::format("endpoints.{} must be a table", name.str()));
      c.endpoints.emplace(std::string(name.str()), read_endpoint(*node.as_table(), std::string(name.str())));
    }
  }
  if (const toml::table* providers = r.table("providers")) {
    Reader pr(*providers, "providers");
    if (const toml::array* arr = pr.tables("translation")) {
      std::size_t i = 0;
      for (const toml::node& n : *arr) c.translation.push_back(read_translation(*n.as_table(), i++, base_dir));
    }
    if (const toml::array* arr = pr.tables("extraction")) {
      std::size_t i = 0;
      for (const toml::node& n : *arr) c.extraction_providers.push_back(read_extraction_provider(*n.as_table(), i++));
    }
    pr.finish();
  }
  if (const toml::table* t = r.table("embedder")) {
    Reader er(*t, "embedder");
    c.embedder.kind = er.str_or("kind", c.embedder.kind);
    if (c.embedder.kind != "hashed" && c.embedder.kind != "live") {
      throw ConfigError(fmt::format("unknown embedder kind '{}' (expected hashed or live)", c.embedder.kind));
    }
    c.embedder.id = er.str_or("id", c.embedder.id);
    if (auto v = er.integer("dimension")) c.embedder.dimension = non_negative(*v, "embedder.dimension");
    if (auto v = er.integer("ngram")) c.embedder.ngram = non_negative(*v, "embedder.ngram");
    if (auto v = er.str("synonyms")) c.embedder.synonyms = resolve(base_dir, *v);
    c.embedder.synonyms_fixture = er.str("synonyms_fixture");
    c.embedder.endpoint = er.str_or("endpoint", "");
    er.finish();
    if (c.embedder.dimension == 0 || c.embedder.ngram == 0) throw ConfigError("embedder dimension and ngram must be positive");
  }
  if (const toml::table* t = r.table("extraction")) {
    Reader xr(*t, "extraction");
    if (auto v = xr.str("strategy")) c.extraction.strategy = terms::strategy_from_string(*v);
    if (auto v = xr.strings("lexicons")) {
      for (const auto& p : *v) c.extraction.lexicons.push_back(resolve(base_dir, p));
    }
    if (auto v = xr.strings("lexicon_fixtures")) c.extraction.lexicon_fixtures = *v;
    c.extraction.provider = xr.str("provider");
    if (auto v = xr.boolean("track_intermediate")) c.extraction.track_intermediate = *v;
    xr.finish();
  }
  {
    const toml::array* paths = r.tables("paths");
    const toml::array* fanouts = r.tables("fanout");
    if (paths != nullptr) {
      std::size_t i = 0;
      for (const toml::node& n : *paths) c.paths.push_back(read_path(*n.as_table(), i++, c.source.lang));
    }
    if (fanouts != nullptr) {
      std::size_t i = 0;
      for (const toml::node& n : *fanouts) {
        for (BtPath& p : read_fanout(*n.as_table(), i++, c.source.lang)) c.paths.push_back(std::move(p));
      }
    }
  }
  read_metrics(r, c.metric_params);
  read_thresholds(r, c.thresholds);
  if (const toml::table* t = r.table("consistency")) {
    Reader cr(*t, "consistency");
    if (const toml::table* w = cr.table("weights")) {
      for (auto&& [term, node] : *w) {
        auto v = node.value<double>();
        if (!v || *v < 0.0) throw ConfigError(fmt::format("consistency.weights.{} must be a non-negative number", term.str()));
        c.weights[terms::normalize_term(term.str())] = *v;
      }
    }
    cr.finish();
  }
  if (const toml::table* t = r.table("prompts")) {
    for (auto&& [name, node] : *t) {
      if (!node.is_table()) throw ConfigError(fmt::format("prompts.{} must be a table", name.str()));
      Reader pr(*node.as_table(), fmt::format("prompts.{}", name.str()));
      PromptTemplate p{pr.str_or("system", ""), pr.required_str("user")};
      pr.finish();
      c.prompts[std::string(name.str())] = p;
    }
  }
  if (const toml::table* t = r.table("pipeline")) {
    Reader pr(*t, "pipeline");
    if (auto v = pr.integer("parallelism")) c.parallelism = static_cast<int>(*v);
    pr.finish();
  }
  if (const toml::table* t = r.table("termbase")) {
    Reader tr(*t, "termbase");
    if (auto v = tr.str("path")) c.termbase = resolve(base_dir, *v);
    tr.finish();
  }
  r.finish();

  c.metric_params.validate();
  c.thresholds.validate();
  check_references(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string raw;
  try {
    raw = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(fmt::format("cannot read config: {}", e.what()));
  }
  return parse_config(raw, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

void apply_seed(RunConfig& config, std::uint64_t seed) { config.seed = seed; }

std::string to_toml(const RunConfig& c) {
  toml::table root;
  root.insert("schema_version", c.schema_version);
  root.insert("label", c.label);
  root.insert("seed", static_cast<std::int64_t>(c.seed));
  root.insert("cache_dir", c.cache_dir.string());

  toml::table source{{"lang", c.source_spec.lang.code()}};
  const char* source_key = c.source_spec.kind == SourceKind::Fixture ? "fixture"
                           : c.source_spec.kind == SourceKind::File  ? "file"
                                                                     : "text";
  source.insert(source_key, c.source_spec.value);
  root.insert("source", std::move(source));

  if (!c.endpoints.empty()) {
    toml::table eps;
    for (const auto& [name, e] : c.endpoints) {
      eps.insert(name, toml::table{{"base_url", e.base_url},
                                   {"path", e.path},
                                   {"model", e.model},
                                   {"token_env", e.token_env},
                                   {"response_path", e.response_path},
                                   {"rate_per_second", e.rate_per_second},
                                   {"max_attempts", e.max_attempts},
                                   {"initial_backoff_ms", e.initial_backoff_ms},
                                   {"timeout_seconds", e.timeout_seconds},
                                   {"temperature", e.temperature}});
    }
    root.insert("endpoints", std::move(eps));
  }

  toml::table providers;
  toml::array translation;
  for (const auto& t : c.translation) {
    std::string kind = t.kind == TranslationKind::LiveLLM ? "live" : std::string(to_string(t.kind));
    toml::table row{{"id", t.id}, {"kind", kind}};
    if (t.substitutions) row.insert("substitutions", t.substitutions->string());
    if (!t.rules.empty()) {
      toml::array rules;
      for (const auto& rule : t.rules) rules.push_back(rule);
      row.insert("rules", std::move(rules));
    }
    if (t.replay) {
      row.insert("replay", toml::table{{"fixture", t.replay->fixture},
                                       {"lang", t.replay->lang.code()},
                                       {"direction", t.replay->direction}});
    }
    if (t.kind == TranslationKind::Perturbation) row.insert("omission_probability", t.omission_probability);
    if (t.seed) row.insert("seed", static_cast<std::int64_t>(*t.seed));
    if (!t.endpoint.empty()) row.insert("endpoint", t.endpoint);
    row.insert("prompt", t.prompt);
    row.insert("message", t.message);
    translation.push_back(std::move(row));
  }
  if (!translation.empty()) providers.insert("translation", std::move(translation));
  toml::array extraction;
  for (const auto& e : c.extraction_providers) {
    toml::table row{{"id", e.id}, {"kind", std::string(to_string(e.kind))}, {"prompt", e.prompt},
                    {"mode", std::string(to_string(e.mode))}};
    if (!e.endpoint.empty()) row.insert("endpoint", e.endpoint);
    if (e.canned_response) row.insert("canned_response", *e.canned_response);
    extraction.push_back(std::move(row));
  }
  if (!extraction.empty()) providers.insert("extraction", std::move(extraction));
  if (!providers.empty()) root.insert("providers", std::move(providers));

  toml::table embedder{{"kind", c.embedder.kind},
                       {"id", c.embedder.id},
                       {"dimension", static_cast<std::int64_t>(c.embedder.dimension)},
                       {"ngram", static_cast<std::int64_t>(c.embedder.ngram)}};
  if (c.embedder.synonyms) embedder.insert("synonyms", c.embedder.synonyms->string());
  if (c.embedder.synonyms_fixture) embedder.insert("synonyms_fixture", *c.embedder.synonyms_fixture);
  if (!c.embedder.endpoint.empty()) embedder.insert("endpoint", c.embedder.endpoint);
  root.insert("embedder", std::move(embedder));

  toml::table extraction_settings{{"strategy", std::string(terms::to_string(c.extraction.strategy))},
                                  {"track_intermediate", c.extraction.track_intermediate}};
  toml::array lexicons;
  for (const auto& p : c.extraction.lexicons) lexicons.push_back(p.string());
  extraction_settings.insert("lexicons", std::move(lexicons));
  toml::array lexicon_fixtures;
  for (const auto& f : c.extraction.lexicon_fixtures) lexicon_fixtures.push_back(f);
  extraction_settings.insert("lexicon_fixtures", std::move(lexicon_fixtures));
  if (c.extraction.provider) extraction_settings.insert("provider", *c.extraction.provider);
  root.insert("extraction", std::move(extraction_settings));

  toml::array paths;
  for (const BtPath& p : c.paths) {
    toml::array hops;
    for (const Hop& h : p.hops) hops.push_back(toml::table{{"from", h.from.code()}, {"to", h.to.code()}, {"provider", h.provider}});
    paths.push_back(toml::table{{"label", p.label}, {"topology", std::string(to_string(p.topology))}, {"hops", std::move(hops)}});
  }
  root.insert("paths", std::move(paths));

  const auto& m = c.metric_params;
  toml::table metrics{{"bleu_max_n", m.bleu_max_n},
                      {"meteor_alpha", m.meteor_alpha},
                      {"meteor_gamma", m.meteor_gamma},
                      {"tokenizer", std::string(textmetrics::to_string(m.tokenizer))},
                      {"zero_ngram_policy", std::string(textmetrics::to_string(m.zero_ngram_policy))},
                      {"floor_epsilon", m.floor_epsilon},
                      {"meteor_form", std::string(textmetrics::to_string(m.meteor_form))}};
  if (!m.bleu_weights.empty()) {
    toml::array w;
    for (double x : m.bleu_weights) w.push_back(x);
    metrics.insert("bleu_weights", std::move(w));
  }
  root.insert("metrics", std::move(metrics));

  root.insert("thresholds", toml::table{{"irs_low", c.thresholds.irs_low},
                                        {"top_k", c.thresholds.top_k},
                                        {"tau_sem", c.thresholds.tau_sem},
                                        {"tau_align", c.thresholds.tau_align}});
  if (!c.weights.empty()) {
    toml::table w;
    for (const auto& [term, weight] : c.weights) w.insert(term, weight);
    root.insert("consistency", toml::table{{"weights", std::move(w)}});
  }
  if (!c.prompts.empty()) {
    toml::table prompts;
    for (const auto& [name, p] : c.prompts) prompts.insert(name, toml::table{{"system", p.system}, {"user", p.user}});
    root.insert("prompts", std::move(prompts));
  }
  root.insert("pipeline", toml::table{{"parallelism", c.parallelism}});
  if (c.termbase) root.insert("termbase", toml::table{{"path", c.termbase->string()}});

  std::ostringstream out;
  out << root << "\n";
  return out.str();
}

}  // namespace termbt
