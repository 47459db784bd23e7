#pragma once

// Declarative run configuration (TOML). parse_config() validates everything
// up front; to_toml() writes a file that parses back to an equal RunConfig.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "termbt/chat.hpp"
#include "termbt/core.hpp"
#include "termbt/recommend.hpp"
#include "termbt/terms.hpp"
#include "termbt/textmetrics.hpp"
#include "termbt/translation.hpp"

namespace termbt {

inline constexpr int kConfigSchemaVersion = 1;

enum class SourceKind { Fixture, File, Text };

struct SourceSpec {
  SourceKind kind = SourceKind::Text;
  std::string value;  // fixture name, absolute file path, or the text itself
  LangTag lang = LangTag::parse("en");
  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

struct ReplaySpec {
  std::string fixture;
  LangTag lang = LangTag::parse("en");
  std::string direction;  // "forward" or "back"
  friend bool operator==(const ReplaySpec&, const ReplaySpec&) = default;
};

struct TranslationSpec {
  std::string id;
  TranslationKind kind = TranslationKind::Identity;
  // perturbation
  std::optional<std::filesystem::path> substitutions;
  std::vector<std::string> rules;  // inline "from => to" lines, applied after the file
  std::optional<ReplaySpec> replay;
  double omission_probability = 0.0;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
  // live
  std::string endpoint;
  std::string prompt = "translate";
  // fault
  std::string message = "injected failure";
  friend bool operator==(const TranslationSpec&, const TranslationSpec&) = default;
};

enum class ExtractionMode { Terms, Triples };

struct ExtractionSpec {
  std::string id;
  ExtractionKind kind = ExtractionKind::RuleBased;
  std::string endpoint;                        // prompted, live
  std::optional<std::string> canned_response;  // prompted, offline replay
  std::string prompt = "extract-terms";
  ExtractionMode mode = ExtractionMode::Terms;
  friend bool operator==(const ExtractionSpec&, const ExtractionSpec&) = default;
};

struct EmbedderSpec {
  std::string kind = "hashed";  // "hashed" or "live"
  std::string id = "hashed-char3";
  std::size_t dimension = 256;
  std::size_t ngram = 3;
  std::optional<std::filesystem::path> synonyms;
  std::optional<std::string> synonyms_fixture;
  std::string endpoint;
  friend bool operator==(const EmbedderSpec&, const EmbedderSpec&) = default;
};

struct ExtractionSettings {
  terms::Strategy strategy = terms::Strategy::RuleBased;
  std::vector<std::filesystem::path> lexicons;
  std::vector<std::string> lexicon_fixtures;
  std::optional<std::string> provider;
  bool track_intermediate = true;
  friend bool operator==(const ExtractionSettings&, const ExtractionSettings&) = default;
};

struct RunConfig {
  RunConfig(SourceSpec spec, Document doc) : source_spec(std::move(spec)), source(std::move(doc)) {}

  int schema_version = kConfigSchemaVersion;
  std::string label;
  std::uint64_t seed = 0;
  std::filesystem::path cache_dir = ".termbt-cache";
  SourceSpec source_spec;
  Document source;  // resolved from source_spec
  std::vector<BtPath> paths;
  std::map<std::string, EndpointSpec> endpoints;
  std::vector<TranslationSpec> translation;
  std::vector<ExtractionSpec> extraction_providers;
  EmbedderSpec embedder;
  ExtractionSettings extraction;
  textmetrics::MetricParams metric_params;
  recommend::Thresholds thresholds;
  std::map<std::string, double> weights;  // normalized EN term -> IRS weight
  std::map<std::string, PromptTemplate> prompts;  // overrides of the built-in templates
  int parallelism = 4;
  std::optional<std::filesystem::path> termbase;

  const TranslationSpec* find_translation(std::string_view id) const;
  const ExtractionSpec* find_extraction(std::string_view id) const;
  /// Built-in templates with this config's overrides applied.
  std::map<std::string, PromptTemplate> effective_prompts() const;
  std::uint64_t seed_for(const TranslationSpec& spec) const { return spec.seed.value_or(seed); }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Relative paths resolve against `base_dir`. Throws ConfigError (syntax
/// errors carry line:column, unknown ids and bad values name the key) or
/// PathError for malformed paths.
RunConfig parse_config(std::string_view raw, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

std::string to_toml(const RunConfig& config);

/// The resolved source document for a spec.
Document resolve_source(const SourceSpec& spec);

/// Overrides the run seed; providers without their own seed follow it.
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace termbt
