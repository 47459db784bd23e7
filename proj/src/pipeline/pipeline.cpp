#include "termbt/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include "termbt/error.hpp"
#include "termbt/fixtures.hpp"
#include "termbt/lexicon.hpp"

namespace termbt::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string random_run_id() {
  std::random_device rd;
  std::uint64_t hi = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  std::uint64_t lo = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  return fmt::format("{:016x}{:016x}", hi, lo);
}

void merge_into(SubstitutionLexicon& into, const SubstitutionLexicon& from) {
  for (const auto& [k, v] : from.entries()) into.add(k, v);
}

SubstitutionLexicon perturbation_lexicon(const TranslationSpec& spec) {
  SubstitutionLexicon lex;
  if (spec.replay) {
    const fixtures::FixtureSet f = fixtures::load_fixture(spec.replay->fixture);
    merge_into(lex, fixtures::replay_lexicon(f, spec.replay->lang,
                                             fixtures::replay_direction_from_string(spec.replay->direction)));
  }
  if (spec.substitutions) merge_into(lex, SubstitutionLexicon::load(*spec.substitutions));
  if (!spec.rules.empty()) {
    std::string joined;
    for (const std::string& r : spec.rules) joined += r + "\n";
    merge_into(lex, SubstitutionLexicon::parse(joined, fmt::format("providers.translation '{}' rules", spec.id)));
  }
  return lex;
}

class ClientPool {
 public:
  ClientPool(const RunConfig& config, const RunOptions& options, Bindings& bindings)
      : config_(config), options_(options), bindings_(bindings) {}

  std::shared_ptr<ChatClient> get(const std::string& provider_id, const std::string& endpoint_name) {
    auto ep = config_.endpoints.find(endpoint_name);
    if (ep == config_.endpoints.end()) {
      throw ConfigError(fmt::format("provider '{}' names unknown endpoint '{}'", provider_id, endpoint_name));
    }
    if (!cache_) cache_ = std::make_shared<ResponseCache>(config_.cache_dir);
    std::shared_ptr<HttpTransport> transport =
        options_.transport_factory
            ? options_.transport_factory(provider_id, ep->second)
            : make_http_transport(provider_id, ep->second.base_url, std::chrono::seconds(ep->second.timeout_seconds));
    ChatClient::Options o{provider_id, ep->second, options_.offline, cache_, options_.sleeper};
    auto client = std::make_shared<ChatClient>(std::move(o), std::move(transport));
    bindings_.clients.push_back(client);
    return client;
  }

 private:
  const RunConfig& config_;
  const RunOptions& options_;
  Bindings& bindings_;
  std::shared_ptr<ResponseCache> cache_;
};

std::shared_ptr<EmbeddingProvider> make_embedder(const RunConfig& config, ClientPool& pool) {
  const EmbedderSpec& spec = config.embedder;
  if (spec.kind == "live") {
    return std::make_shared<LiveEmbedder>(spec.id, spec.dimension, pool.get(spec.id, spec.endpoint));
  }
  std::shared_ptr<SynonymGroups> synonyms;
  if (spec.synonyms || spec.synonyms_fixture) {
    synonyms = std::make_shared<SynonymGroups>();
    if (spec.synonyms_fixture) {
      const fixtures::FixtureSet f = fixtures::load_fixture(*spec.synonyms_fixture);
      for (const auto& g : f.synonyms.groups()) synonyms->add_group(g);
    }
    if (spec.synonyms) {
      const SynonymGroups loaded = SynonymGroups::load(*spec.synonyms);
      for (const auto& g : loaded.groups()) synonyms->add_group(g);
    }
  }
  return std::make_shared<HashedNgramEmbedder>(spec.id, spec.dimension, spec.ngram, synonyms);
}

PathFailure describe(const std::exception& e, std::optional<std::size_t> hop) {
  PathFailure f{"E_INTERNAL", e.what(), "", hop, 1};
  if (const auto* pe = dynamic_cast<const ProviderError*>(&e)) {
    f.code = code_name(pe->code());
    f.provider = pe->provider();
    f.attempts = pe->attempts();
  } else if (const auto* te = dynamic_cast<const Error*>(&e)) {
    f.code = code_name(te->code());
  }
  return f;
}

std::vector<terms::Term> extract_from(const Document& doc, const RunConfig& config, const Bindings& b,
                                      const terms::TermLexicon& lexicon) {
  return terms::extract(doc, config.extraction.strategy, lexicon, b.extractor.get());
}

PathResult run_path(const RunConfig& config, const Bindings& b, const BtPath& path,
                    const std::vector<terms::Term>& source_terms) {
  PathResult out;
  out.path = path;
  const LangTag& source_lang = config.source.lang;
  std::optional<std::size_t> hop;
  try {
    auto t0 = Clock::now();
    const Document* current = &config.source;
    for (std::size_t i = 0; i < path.hops.size(); ++i) {
      hop = i;
      const Hop& h = path.hops[i];
      out.documents.push_back(translate(b.translator(h.provider), *current, h.to, source_lang));
      current = &out.documents.back();
    }
    hop.reset();
    out.timings_ms["translate"] = elapsed_ms(t0);
    const Document& eny = out.documents.back();

    t0 = Clock::now();
    out.text_scores = textmetrics::score_texts(eny, config.source, config.metric_params, *b.embedder);
    out.timings_ms["score"] = elapsed_ms(t0);

    t0 = Clock::now();
    if (config.extraction.track_intermediate) {
      for (std::size_t i = 0; i + 1 < out.documents.size(); ++i) {
        const Document& doc = out.documents[i];
        const terms::TermLexicon lex = intermediate_lexicon(b.lexicon, doc.lang, source_lang);
        out.intermediate_terms.emplace_back(doc.lang, extract_from(doc, config, b, lex));
      }
    }
    out.eny_terms = extract_from(eny, config, b, b.lexicon);
    out.timings_ms["extract"] = elapsed_ms(t0);

    t0 = Clock::now();
    consistency::AlignOptions opts{config.thresholds.tau_align, config.thresholds.tau_sem, &b.lexicon};
    consistency::Alignment al = consistency::align_terms(source_terms, out.eny_terms, out.intermediate_terms, *b.embedder, opts);
    out.report = consistency::compute_report(path.label, std::move(al.records), std::move(al.unmatched_eny),
                                             out.text_scores, config.weights);
    out.timings_ms["align"] = elapsed_ms(t0);
  } catch (const std::exception& e) {
    out.failure = describe(e, hop);
  }
  return out;
}

}  // namespace

TranslationProvider& Bindings::translator(const std::string& id) const {
  auto it = translators.find(id);
  if (it == translators.end()) throw ConfigError(fmt::format("no translation provider '{}'", id));
  return *it->second;
}

std::size_t Bindings::network_calls() const {
  std::size_t n = 0;
  for (const auto& c : clients) n += c->network_calls();
  return n;
}

Bindings build_bindings(const RunConfig& config, const RunOptions& options) {
  Bindings b;
  ClientPool pool(config, options, b);
  const auto prompts = config.effective_prompts();

  for (const TranslationSpec& spec : config.translation) {
    std::shared_ptr<TranslationProvider> p;
    switch (spec.kind) {
      case TranslationKind::Identity:
        p = std::make_shared<IdentityTranslator>(spec.id);
        break;
      case TranslationKind::Perturbation:
        p = std::make_shared<PerturbationTranslator>(spec.id, perturbation_lexicon(spec), spec.omission_probability,
                                                     config.seed_for(spec));
        break;
      case TranslationKind::LiveLLM:
        p = std::make_shared<LiveTranslator>(spec.id, pool.get(spec.id, spec.endpoint), prompts.at(spec.prompt));
        break;
      case TranslationKind::Fault:
        p = std::make_shared<FaultTranslator>(spec.id, spec.message);
        break;
    }
    b.translators.emplace(spec.id, std::move(p));
  }

  for (const auto& path : config.extraction.lexicons) b.lexicon.merge(terms::TermLexicon::load(path));
  for (const auto& name : config.extraction.lexicon_fixtures) b.lexicon.merge(fixtures::load_fixture(name).lexicon);

  b.embedder = make_embedder(config, pool);

  if (config.extraction.strategy != terms::Strategy::RuleBased) {
    const ExtractionSpec* spec = config.find_extraction(config.extraction.provider.value_or(""));
    if (spec == nullptr) throw ConfigError("extraction strategy needs [extraction] provider");
    if (spec->kind == ExtractionKind::RuleBased) {
      b.extractor = std::make_shared<terms::RuleBasedExtractor>(spec->id, b.lexicon);
    } else {
      std::shared_ptr<Completion> completion;
      if (spec->canned_response) {
        completion = std::make_shared<CannedCompletion>(*spec->canned_response);
      } else {
        completion = std::make_shared<ClientCompletion>(pool.get(spec->id, spec->endpoint));
      }
      b.extractor = std::make_shared<PromptedExtractor>(spec->id, completion, prompts.at(spec->prompt));
    }
  }
  return b;
}

terms::TermLexicon intermediate_lexicon(const terms::TermLexicon& lexicon, const LangTag& lang,
                                        const LangTag& source_lang) {
  terms::TermLexicon out;
  for (const std::string& e : lexicon.entries(lang)) out.add(lang, e);
  for (const std::string& e : lexicon.entries(source_lang)) out.add(lang, e);
  return out;
}

std::vector<Document> run_serial(const BtPath& path, const Document& source, const Bindings& bindings) {
  validate_path(path);
  if (path.source_lang() != source.lang) {
    throw PathError(fmt::format("path '{}' starts at '{}' but the source is '{}'", path.label,
                                path.source_lang().code(), source.lang.code()));
  }
  std::vector<Document> docs;
  docs.reserve(path.hops.size());
  for (const Hop& h : path.hops) {
    const Document& from = docs.empty() ? source : docs.back();
    docs.push_back(translate(bindings.translator(h.provider), from, h.to, source.lang));
  }
  return docs;
}

std::vector<ConfidenceRow> cross_path_consistency(const std::vector<PathResult>& paths) {
  std::map<std::string, ConfidenceRow> by_term;
  bool any = false;
  for (const PathResult& p : paths) {
    if (!p.ok() || !p.report) continue;
    any = true;
    for (const auto& r : p.report->records) {
      ConfidenceRow& row = by_term[r.en.normalized];
      row.en_term = r.en.normalized;
      row.observations.push_back({p.path.label, {r.exact_match, r.semantic_score}});
    }
  }
  if (!any) throw Error(ErrorCode::Precondition, "cross-path consistency needs at least one completed path");
  std::vector<ConfidenceRow> rows;
  for (auto& [term, row] : by_term) {
    std::vector<consistency::Observation> obs;
    for (const auto& o : row.observations) obs.push_back(o.observation);
    row.confidence = consistency::confidence_score(obs);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ConfidenceRow& a, const ConfidenceRow& b) { return a.confidence < b.confidence; });
  return rows;
}

std::size_t RunResult::failed_paths() const {
  return static_cast<std::size_t>(std::count_if(paths.begin(), paths.end(), [](const PathResult& p) { return !p.ok(); }));
}

int RunResult::exit_code() const {
  const std::size_t failed = failed_paths();
  if (failed == 0) return 0;
  return failed == paths.size() ? 1 : 3;
}

RunResult run(const RunConfig& config, const RunOptions& options) {
  const auto t0 = Clock::now();
  Bindings b = build_bindings(config, options);
  const double bind_ms = elapsed_ms(t0);
  RunResult r = run(config, b, options);
  r.timings_ms["bind"] = bind_ms;
  r.timings_ms["total"] += bind_ms;
  return r;
}

RunResult run(const RunConfig& config, const Bindings& bindings, const RunOptions& options) {
  const auto start = Clock::now();
  RunResult r(config.source);
  r.run_id = options.run_id.value_or(random_run_id());
  r.timestamp = options.timestamp.value_or(recommend::now_utc_iso8601());
  r.label = config.label;
  r.seed = config.seed;

  auto t0 = Clock::now();
  r.source_terms = terms::extract(config.source, config.extraction.strategy, bindings.lexicon, bindings.extractor.get());
  r.timings_ms["extract_source"] = elapsed_ms(t0);

  r.paths.resize(config.paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.paths.size(); i = next++) {
      r.paths[i] = run_path(config, bindings, config.paths[i], r.source_terms);
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(config.parallelism, 1)), config.paths.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 1; i < n_threads; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (const PathResult& p : r.paths) {
    for (const auto& [stage, ms] : p.timings_ms) r.timings_ms[stage] += ms;
  }

  t0 = Clock::now();
  std::vector<recommend::PathRecords> evidence;
  for (const PathResult& p : r.paths) {
    if (p.ok()) evidence.push_back({p.path.label, p.path.intermediate_langs(), p.report->records});
  }
  if (!evidence.empty()) {
    r.confidence = cross_path_consistency(r.paths);
    r.recommendations = recommend::recommend_all(evidence, config.thresholds, r.run_id, r.timestamp);
  }
  r.timings_ms["recommend"] = elapsed_ms(t0);
  r.timings_ms["total"] = elapsed_ms(start);
  return r;
}

}  // namespace termbt::pipeline
