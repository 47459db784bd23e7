#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "termbt/core.hpp"
#include "termbt/extraction.hpp"
#include "termbt/terms.hpp"
#include "termbt/textmetrics.hpp"

namespace termbt {
class EmbeddingProvider;
}

namespace termbt::consistency {

using terms::Term;

/// The term as seen in one intermediate language. `term` is empty when that
/// stage dropped it.
struct IntermediateTerm {
  LangTag lang;
  std::optional<Term> term;

  friend bool operator==(const IntermediateTerm&, const IntermediateTerm&) = default;
};

struct TermRecord {
  Term en;
  std::vector<IntermediateTerm> intermediates;  // empty when intermediate stages were not tracked
  std::optional<Term> eny;
  bool exact_match = false;
  bool semantic_match = false;
  double semantic_score = 0.0;
  double irs = 0.0;
  std::string notes;

  /// Intermediate term in `lang`, if tracked and present.
  const Term* intermediate(const LangTag& lang) const;
  bool intermediate_dropped() const;

  friend bool operator==(const TermRecord&, const TermRecord&) = default;
};

struct Alignment {
  std::vector<TermRecord> records;
  std::vector<Term> unmatched_eny;  // ENy terms that pair with nothing in EN
};

struct AlignOptions {
  double tau_align = 0.6;
  double tau_sem = 0.75;
  /// Bilingual pairs used to find each EN term's intermediate rendering.
  const terms::TermLexicon* lexicon = nullptr;
};

/// Character 3-gram Jaccard similarity of the two strings (codepoints).
double char_trigram_jaccard(std::string_view a, std::string_view b);

/// Pairs EN with ENy terms: equal normalized forms first, then greedily by
/// descending max(cosine, 3-gram Jaccard) >= tau_align. Every record is
/// classified and IRS-scored. Intermediate terms are attached through the
/// lexicon's bilingual pairs when available, else by normalized equality.
Alignment align_terms(const std::vector<Term>& en_terms, const std::vector<Term>& eny_terms,
                      const std::vector<std::pair<LangTag, std::vector<Term>>>& l2_terms,
                      const EmbeddingProvider& embedder, const AlignOptions& options);

/// Records built straight from provider-aligned triples; only classification
/// and IRS scoring run.
Alignment align_from_triples(const TripleList& triples, const LangTag& source_lang,
                             const std::optional<LangTag>& l2_lang, const EmbeddingProvider& embedder,
                             const AlignOptions& options);

struct MatchClass {
  bool exact = false;
  bool semantic = false;
  double score = 0.0;
};

/// exact iff normalized forms are equal; semantic iff exact or cosine >= tau_sem.
MatchClass classify_match(const Term& en, const std::optional<Term>& eny, const EmbeddingProvider& embedder,
                          double tau_sem);

/// 0.0 when unpaired or not semantic; 0.5 when paired and semantic but the
/// ENy form lost at least one token or an intermediate stage dropped the
/// term; 1.0 otherwise.
double score_irs(const TermRecord& record);

/// Word count used by the IRS shrink rule.
std::size_t token_count(std::string_view normalized);

struct ConsistencyReport {
  std::string path_label;
  std::vector<TermRecord> records;
  std::vector<Term> unmatched_eny;
  double emr = 0.0;  // percent
  double smr = 0.0;  // percent
  double irs_mean = 0.0;
  double tdi = 0.0;
  double term_level_accuracy = 0.0;  // percent; same value as smr
  std::optional<textmetrics::TextScore> text_scores;
};

/// Throws Error(Precondition) on an empty record list. `weights` maps an EN
/// normalized term to its IRS weight; missing terms weigh 1.
ConsistencyReport compute_report(std::string path_label, std::vector<TermRecord> records,
                                 std::vector<Term> unmatched_eny,
                                 std::optional<textmetrics::TextScore> text_scores,
                                 const std::map<std::string, double>& weights = {});

/// Total variation distance between the normalized-term frequency
/// distributions. Empty ENy against non-empty EN gives 1.
double compute_tdi(const std::vector<std::string>& en_terms, const std::vector<std::string>& eny_terms);
double compute_tdi(const std::vector<Term>& en_terms, const std::vector<Term>& eny_terms);

struct Observation {
  bool exact = false;
  double semantic_score = 0.0;
};

/// 0.5 * exact fraction + 0.5 * mean score clipped to [0, 1].
double confidence_score(const std::vector<Observation>& observations);

}  // namespace termbt::consistency
