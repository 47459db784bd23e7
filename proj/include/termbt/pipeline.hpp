#pragma once

// Run orchestration: translate along every configured path, score the
// back-translation, extract and align terms, then recommend.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "termbt/chat.hpp"
#include "termbt/config.hpp"
#include "termbt/consistency.hpp"
#include "termbt/core.hpp"
#include "termbt/embedding.hpp"
#include "termbt/extraction.hpp"
#include "termbt/recommend.hpp"
#include "termbt/terms.hpp"
#include "termbt/textmetrics.hpp"
#include "termbt/translation.hpp"

namespace termbt::pipeline {

using TransportFactory = std::function<std::shared_ptr<HttpTransport>(const std::string& provider_id, const EndpointSpec&)>;

struct RunOptions {
  bool offline = false;  // live providers may only answer from the cache
  TransportFactory transport_factory;  // default: real HTTP
  Sleeper sleeper;                     // default: real sleeps between retries
  std::optional<std::string> run_id;     // default: random
  std::optional<std::string> timestamp;  // default: now
};

/// Providers instantiated from a config. Shared by every path of a run.
struct Bindings {
  std::map<std::string, std::shared_ptr<TranslationProvider>> translators;
  std::shared_ptr<EmbeddingProvider> embedder;
  std::shared_ptr<ExtractionProvider> extractor;  // null unless the strategy needs one
  terms::TermLexicon lexicon;
  std::vector<std::shared_ptr<ChatClient>> clients;

  TranslationProvider& translator(const std::string& id) const;
  /// Requests that reached the network, summed over live clients.
  std::size_t network_calls() const;
};

Bindings build_bindings(const RunConfig& config, const RunOptions& options = {});

/// The lexicon used on intermediate texts: its own entries plus the
/// source-language entries, so untranslated terms are still found.
terms::TermLexicon intermediate_lexicon(const terms::TermLexicon& lexicon, const LangTag& lang,
                                        const LangTag& source_lang);

/// One document per hop; each is derived from the previous one.
std::vector<Document> run_serial(const BtPath& path, const Document& source, const Bindings& bindings);

struct PathFailure {
  std::string code;  // e.g. "E_TRANSPORT"
  std::string message;
  std::string provider;  // empty when no provider was involved
  std::optional<std::size_t> hop;
  int attempts = 1;
};

struct PathResult {
  BtPath path;
  std::vector<Document> documents;
  std::optional<PathFailure> failure;
  std::optional<textmetrics::TextScore> text_scores;
  std::vector<std::pair<LangTag, std::vector<terms::Term>>> intermediate_terms;
  std::vector<terms::Term> eny_terms;
  std::optional<consistency::ConsistencyReport> report;
  std::map<std::string, double> timings_ms;

  bool ok() const { return !failure.has_value(); }
};

struct PathObservation {
  std::string path_label;
  consistency::Observation observation;
};

struct ConfidenceRow {
  std::string en_term;  // normalized
  std::vector<PathObservation> observations;
  double confidence = 0.0;
};

/// Per EN term, confidence over every completed path. Sorted ascending by
/// confidence, ties by term. Throws Error(Precondition) when no path completed.
std::vector<ConfidenceRow> cross_path_consistency(const std::vector<PathResult>& paths);

struct RunResult {
  explicit RunResult(Document src) : source(std::move(src)) {}

  int schema_version = 1;
  std::string run_id;
  std::string label;
  std::uint64_t seed = 0;
  std::string timestamp;
  Document source;
  std::vector<terms::Term> source_terms;
  std::vector<PathResult> paths;  // config order
  std::vector<ConfidenceRow> confidence;
  recommend::Recommendations recommendations;
  std::map<std::string, double> timings_ms;

  std::size_t failed_paths() const;
  /// 0 when every path completed, 3 when some failed, 1 when all failed.
  int exit_code() const;
};

RunResult run(const RunConfig& config, const RunOptions& options = {});
RunResult run(const RunConfig& config, const Bindings& bindings, const RunOptions& options = {});

// JSON form of a run (schema_version 1).
nlohmann::ordered_json to_json(const RunResult& result);
nlohmann::ordered_json to_json(const textmetrics::TextScore& score);
nlohmann::ordered_json to_json(const terms::Term& term);
nlohmann::ordered_json to_json(const consistency::TermRecord& record);
nlohmann::ordered_json to_json(const Document& doc);
std::string serialize(const RunResult& result);

/// Drops the keys that differ between otherwise identical runs: run_id,
/// timestamp and timings_ms, at any depth.
nlohmann::ordered_json strip_volatile(nlohmann::ordered_json j);

}  // namespace termbt::pipeline
