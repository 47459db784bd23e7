#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "termbt/core.hpp"
#include "termbt/extraction.hpp"

namespace termbt::terms {

enum class TermSource { Dictionary, Pattern, Provider };

std::string_view to_string(TermSource source);
TermSource term_source_from_string(std::string_view raw);

/// Codepoint offsets into the parent document, end exclusive.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct Term {
  std::string surface;
  std::string normalized;
  LangTag lang;
  std::optional<Span> span;
  TermSource source = TermSource::Dictionary;

  friend bool operator==(const Term&, const Term&) = default;
};

using KnownForms = std::set<std::string, std::less<>>;

/// Lowercase, NFC, collapse internal whitespace, trim, and strip edge
/// punctuation (brackets that pair up inside the term are kept), repeated to
/// a fixed point.
std::string base_normalize(std::string_view surface);

/// base_normalize plus a conservative plural rule: a final "s" on the last
/// token is dropped only when the token is longer than 3 codepoints, the
/// letter before it is an ASCII letter other than 's', and the singular form
/// is in `known`.
std::string normalize_term(std::string_view surface, const KnownForms* known = nullptr);

/// Per-language sets of known terms plus optional bilingual pairs
/// (source term, language, target term). All strings stored base-normalized.
class TermLexicon {
 public:
  void add(const LangTag& lang, std::string_view term);
  void add_pair(std::string_view source_term, const LangTag& lang, std::string_view target_term);

  bool contains(const LangTag& lang, std::string_view normalized) const;
  bool has_pair(std::string_view source_term, const LangTag& lang, std::string_view target_term) const;
  bool has_pairs_for(const LangTag& lang) const;
  const std::set<std::string>& entries(const LangTag& lang) const;
  std::vector<LangTag> languages() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  /// Every entry of every language; the corpus side of plural stripping.
  KnownForms known_forms() const;

  void merge(const TermLexicon& other);
  const std::vector<std::string>& provenance() const { return provenance_; }
  void add_provenance(std::string origin) { provenance_.push_back(std::move(origin)); }

  /// "<name>.<lang>.lex": one term per line. "<name>.<lang>.pairs": lines of
  /// "source term => target term" in that target language. '#' starts a comment.
  static TermLexicon load(const std::filesystem::path& path);
  static TermLexicon parse(std::string_view content, const LangTag& lang, bool pairs, std::string_view origin);

 private:
  std::map<LangTag, std::set<std::string>> entries_;
  std::set<std::tuple<std::string, std::string, std::string>> pairs_;  // (source, lang, target)
  std::vector<std::string> provenance_;
};

/// Dictionary hits (leftmost-longest, word-boundary aware for alphabetic
/// scripts) and pattern hits (acronyms with optional year, hyphenated
/// compounds carrying a digit or capitals, percentage + noun). One Term per
/// normalized form, Dictionary winning over Pattern, in document order.
std::vector<Term> extract_rule_based(const Document& doc, const TermLexicon& lexicon);

enum class Strategy { RuleBased, Provider, Union };

std::string_view to_string(Strategy strategy);
Strategy strategy_from_string(std::string_view raw);

/// Throws Error(Precondition) when the strategy needs a provider that is missing.
std::vector<Term> extract(const Document& doc, Strategy strategy, const TermLexicon& lexicon,
                          ExtractionProvider* provider);

/// Wraps terms from a provider (surfaces) into Terms, locating spans when the
/// surface occurs in the document.
std::vector<Term> terms_from_surfaces(const Document& doc, const std::vector<std::string>& surfaces,
                                      TermSource source, const KnownForms* known = nullptr);

/// Recompute every term's normalized form against `known`.
void renormalize(std::vector<Term>& terms, const KnownForms& known);

/// ExtractionProvider facade over extract_rule_based.
class RuleBasedExtractor final : public ExtractionProvider {
 public:
  RuleBasedExtractor(std::string id, TermLexicon lexicon) : id_(std::move(id)), lexicon_(std::move(lexicon)) {}
  const std::string& id() const override { return id_; }
  ExtractionKind kind() const override { return ExtractionKind::RuleBased; }
  ExtractionOutput extract(const Document& doc) override;

 private:
  std::string id_;
  TermLexicon lexicon_;
};

}  // namespace termbt::terms
