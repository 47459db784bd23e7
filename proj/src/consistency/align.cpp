#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <tuple>

#include "termbt/consistency.hpp"
#include "termbt/embedding.hpp"
#include "termbt/error.hpp"
#include "termbt/unicode.hpp"

namespace termbt::consistency {

namespace {

std::set<std::u32string> trigrams(std::string_view s) {
  const std::u32string cps = unicode::decode(s);
  std::set<std::u32string> out;
  if (cps.empty()) return out;
  if (cps.size() < 3) {
    out.insert(cps);
    return out;
  }
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) out.insert(cps.substr(i, 3));
  return out;
}

void attach_intermediates(TermRecord& record, const std::vector<std::pair<LangTag, std::vector<Term>>>& l2_terms,
                          const terms::TermLexicon* lexicon) {
  const std::string en_base = terms::base_normalize(record.en.surface);
  for (const auto& [lang, candidates] : l2_terms) {
    std::optional<Term> found;
    for (const Term& c : candidates) {
      const bool paired = lexicon != nullptr && (lexicon->has_pair(en_base, lang, c.normalized) ||
                                                 lexicon->has_pair(record.en.normalized, lang, c.normalized));
      if (paired || c.normalized == record.en.normalized) {
        found = c;
        break;
      }
    }
    // Without bilingual pairs for this language a miss says nothing about
    // the stage, so the language stays untracked for this term.
    if (!found && (lexicon == nullptr || !lexicon->has_pairs_for(lang))) continue;
    if (!found) {
      if (!record.notes.empty()) record.notes += "; ";
      record.notes += fmt::format("omitted in {}", lang.code());
    }
    record.intermediates.push_back(IntermediateTerm{lang, found});
  }
}

void finish(TermRecord& record, const EmbeddingProvider& embedder, double tau_sem) {
  const MatchClass m = classify_match(record.en, record.eny, embedder, tau_sem);
  record.exact_match = m.exact;
  record.semantic_match = m.semantic;
  record.semantic_score = m.score;
  if (!record.eny) {
    if (!record.notes.empty()) record.notes += "; ";
    record.notes += "omitted in back-translation";
  }
  record.irs = score_irs(record);
}

terms::KnownForms corpus(const std::vector<const std::vector<Term>*>& lists, const terms::TermLexicon* lexicon) {
  terms::KnownForms known = lexicon ? lexicon->known_forms() : terms::KnownForms{};
  for (const auto* list : lists) {
    for (const Term& t : *list) known.insert(terms::base_normalize(t.surface));
  }
  return known;
}

}  // namespace

const Term* TermRecord::intermediate(const LangTag& lang) const {
  for (const auto& it : intermediates) {
    if (it.lang == lang && it.term) return &*it.term;
  }
  return nullptr;
}

bool TermRecord::intermediate_dropped() const {
  return std::any_of(intermediates.begin(), intermediates.end(), [](const IntermediateTerm& it) { return !it.term; });
}

double char_trigram_jaccard(std::string_view a, std::string_view b) {
  const auto ga = trigrams(a);
  const auto gb = trigrams(b);
  if (ga.empty() && gb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& g : ga) common += gb.count(g);
  const std::size_t uni = ga.size() + gb.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

std::size_t token_count(std::string_view normalized) {
  std::size_t n = 0;
  bool in_token = false;
  for (char32_t cp : unicode::decode(normalized)) {
    if (unicode::is_space(cp)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

MatchClass classify_match(const Term& en, const std::optional<Term>& eny, const EmbeddingProvider& embedder,
                          double tau_sem) {
  if (!(tau_sem > 0.0 && tau_sem <= 1.0)) {
    throw Error(ErrorCode::Precondition, fmt::format("tau_sem must be in (0, 1], got {}", tau_sem));
  }
  MatchClass m;
  if (!eny) return m;
  m.exact = en.normalized == eny->normalized;
  m.score = m.exact ? 1.0 : textmetrics::cosine_similarity(en.normalized, eny->normalized, embedder);
  m.semantic = m.exact || m.score >= tau_sem;
  return m;
}

double score_irs(const TermRecord& record) {
  if (!record.eny || !record.semantic_match) return 0.0;
  const bool shrank = token_count(record.eny->normalized) < token_count(record.en.normalized);
  return shrank || record.intermediate_dropped() ? 0.5 : 1.0;
}

Alignment align_terms(const std::vector<Term>& en_terms, const std::vector<Term>& eny_terms,
                      const std::vector<std::pair<LangTag, std::vector<Term>>>& l2_terms,
                      const EmbeddingProvider& embedder, const AlignOptions& options) {
  if (!(options.tau_align > 0.0 && options.tau_align <= 1.0)) {
    throw Error(ErrorCode::Precondition, fmt::format("tau_align must be in (0, 1], got {}", options.tau_align));
  }
  std::vector<Term> en = en_terms;
  std::vector<Term> eny = eny_terms;
  std::vector<std::pair<LangTag, std::vector<Term>>> l2 = l2_terms;
  {
    std::vector<const std::vector<Term>*> lists = {&en, &eny};
    for (const auto& [_, list] : l2) lists.push_back(&list);
    const terms::KnownForms known = corpus(lists, options.lexicon);
    terms::renormalize(en, known);
    terms::renormalize(eny, known);
    for (auto& [_, list] : l2) terms::renormalize(list, known);
  }

  constexpr std::size_t kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> en_to_eny(en.size(), kFree);
  std::vector<bool> eny_used(eny.size(), false);

  for (std::size_t i = 0; i < en.size(); ++i) {
    for (std::size_t j = 0; j < eny.size(); ++j) {
      if (!eny_used[j] && en[i].normalized == eny[j].normalized) {
        en_to_eny[i] = j;
        eny_used[j] = true;
        break;
      }
    }
  }

  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < en.size(); ++i) {
    if (en_to_eny[i] != kFree) continue;
    for (std::size_t j = 0; j < eny.size(); ++j) {
      if (eny_used[j]) continue;
      const double cos = textmetrics::cosine_similarity(en[i].normalized, eny[j].normalized, embedder);
      const double s = std::max(cos, char_trigram_jaccard(en[i].normalized, eny[j].normalized));
      if (s >= options.tau_align) candidates.emplace_back(s, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  for (const auto& [s, i, j] : candidates) {
    if (en_to_eny[i] != kFree || eny_used[j]) continue;
    en_to_eny[i] = j;
    eny_used[j] = true;
  }

  Alignment out;
  for (std::size_t i = 0; i < en.size(); ++i) {
    TermRecord record{en[i], {}, std::nullopt, false, false, 0.0, 0.0, ""};
    if (en_to_eny[i] != kFree) record.eny = eny[en_to_eny[i]];
    attach_intermediates(record, l2, options.lexicon);
    finish(record, embedder, options.tau_sem);
    out.records.push_back(std::move(record));
  }
  for (std::size_t j = 0; j < eny.size(); ++j) {
    if (!eny_used[j]) out.unmatched_eny.push_back(eny[j]);
  }
  return out;
}

Alignment align_from_triples(const TripleList& triples, const LangTag& source_lang,
                             const std::optional<LangTag>& l2_lang, const EmbeddingProvider& embedder,
                             const AlignOptions& options) {
  terms::KnownForms known = options.lexicon ? options.lexicon->known_forms() : terms::KnownForms{};
  for (const AlignedTriple& t : triples) {
    known.insert(terms::base_normalize(t.en));
    if (t.eny) known.insert(terms::base_normalize(*t.eny));
  }
  auto make = [&](const std::string& surface, const LangTag& lang) {
    return Term{surface, terms::normalize_term(surface, &known), lang, std::nullopt, terms::TermSource::Provider};
  };
  Alignment out;
  for (const AlignedTriple& t : triples) {
    TermRecord record{make(t.en, source_lang), {}, std::nullopt, false, false, 0.0, 0.0, ""};
    if (t.eny) record.eny = make(*t.eny, source_lang);
    if (l2_lang) {
      std::optional<Term> l2;
      if (t.l2) l2 = make(*t.l2, *l2_lang);
      else record.notes = fmt::format("omitted in {}", l2_lang->code());
      record.intermediates.push_back(IntermediateTerm{*l2_lang, l2});
    }
    finish(record, embedder, options.tau_sem);
    out.records.push_back(std::move(record));
  }
  return out;
}

}  // namespace termbt::consistency
