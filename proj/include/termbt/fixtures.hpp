#pragma once

// Shipped excerpt corpora and term tables, stored as JSON under the data
// directory with a SHA-256 manifest.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "termbt/core.hpp"
#include "termbt/lexicon.hpp"
#include "termbt/terms.hpp"

namespace termbt::fixtures {

struct TermTriple {
  std::string en;
  std::map<LangTag, std::optional<std::string>> l2;  // nullopt: omitted in that language
  std::map<LangTag, std::string> eny;
  std::optional<std::string> consistency;  // label as printed, when the table has one
  std::optional<std::string> observation;
  bool abstract_wide = false;  // not in the excerpt; drawn from the full abstract

  friend bool operator==(const TermTriple&, const TermTriple&) = default;
};

struct FixtureSet {
  std::string name;
  Document source_excerpt;
  std::map<LangTag, Document> intermediate_excerpts;
  std::map<LangTag, Document> bt_excerpts;
  std::vector<LangTag> term_langs;
  std::vector<TermTriple> term_triples;
  terms::TermLexicon lexicon;
  SynonymGroups synonyms;
};

const std::vector<std::string>& fixture_names();

/// $TERMBT_DATA_DIR when set, else the directory baked in at build time.
std::filesystem::path default_data_dir();

/// CRLF and lone CR become LF.
std::string normalize_line_endings(std::string_view content);
std::string checksum(std::string_view content);

/// Throws Error(Fixture) for an unknown name or malformed file and
/// Error(Checksum) when the file does not match the manifest.
FixtureSet load_fixture(std::string_view name, const std::filesystem::path& data_dir = default_data_dir());

/// Excerpt followed by one line per EN term, so every term occurs in the
/// text a pipeline run starts from.
std::string probe_text(const FixtureSet& fixture);

enum class ReplayDirection { Forward, Back };

std::string_view to_string(ReplayDirection direction);
ReplayDirection replay_direction_from_string(std::string_view raw);

/// Substitutions that replay the table for `lang`. Forward maps EN to the L2
/// rendering (or straight to ENy when the table has no L2 form); Back maps
/// the L2 rendering to ENy.
SubstitutionLexicon replay_lexicon(const FixtureSet& fixture, const LangTag& lang, ReplayDirection direction);

}  // namespace termbt::fixtures
