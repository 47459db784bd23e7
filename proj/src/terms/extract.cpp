#include <fmt/format.h>

#include <algorithm>
#include <unordered_map>

#include "termbt/error.hpp"
#include "termbt/lexicon.hpp"
#include "termbt/terms.hpp"
#include "termbt/unicode.hpp"

namespace termbt::terms {

namespace {

bool is_cjk(char32_t cp) {
  return (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
         (cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2FFFF);
}

// Characters that glue to their neighbours to form a word in space-delimited
// scripts. CJK characters never do, so dictionary hits inside CJK runs are fine.
bool is_word(char32_t cp) { return unicode::is_alnum(cp) && !is_cjk(cp); }

bool is_ascii_upper(char32_t cp) { return cp >= U'A' && cp <= U'Z'; }
bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Text folded for matching: simple lowercase per codepoint, whitespace runs
// collapsed to ' '.
struct Folded {
  std::u32string text;
  std::vector<std::size_t> origin;  // original codepoint index per folded codepoint
};

Folded fold(const std::u32string& cps) {
  Folded f;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (unicode::is_space(cps[i])) {
      const std::size_t start = i;
      while (i < cps.size() && unicode::is_space(cps[i])) ++i;
      f.text.push_back(U' ');
      f.origin.push_back(start);
      continue;
    }
    f.text.push_back(unicode::simple_lower(cps[i]));
    f.origin.push_back(i);
    ++i;
  }
  return f;
}

std::u32string fold_key(std::string_view term) {
  std::u32string out;
  bool pending = false;
  for (char32_t cp : unicode::decode(term)) {
    if (unicode::is_space(cp)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(U' ');
    pending = false;
    out.push_back(unicode::simple_lower(cp));
  }
  return out;
}

struct Hit {
  std::size_t start = 0;  // original codepoint offsets
  std::size_t end = 0;
  TermSource source = TermSource::Dictionary;
};

std::vector<Hit> dictionary_hits(const Folded& f, const std::set<std::string>& entries) {
  std::unordered_map<char32_t, std::vector<std::u32string>> by_first;
  for (const std::string& e : entries) {
    std::u32string key = fold_key(e);
    if (!key.empty()) by_first[key.front()].push_back(std::move(key));
  }
  for (auto& [_, keys] : by_first) {
    std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
  }
  std::vector<Hit> hits;
  const std::u32string& t = f.text;
  std::size_t p = 0;
  while (p < t.size()) {
    auto it = by_first.find(t[p]);
    const bool left_ok = p == 0 || !(is_word(t[p - 1]) && is_word(t[p]));
    std::size_t match_end = 0;
    if (it != by_first.end() && left_ok) {
      for (const std::u32string& key : it->second) {
        if (t.compare(p, key.size(), key) != 0) continue;
        std::size_t end = p + key.size();
        if (end < t.size() && is_word(t[end - 1]) && is_word(t[end])) {
          // Allow a plural "s" on an entry, nothing else glued on.
          const bool plural = t[end] == U's' && (end + 1 == t.size() || !is_word(t[end + 1]));
          if (!plural) continue;
          ++end;
        }
        match_end = end;
        break;
      }
    }
    if (match_end == 0) {
      ++p;
      continue;
    }
    hits.push_back(Hit{f.origin[p], f.origin[match_end - 1] + 1, TermSource::Dictionary});
    p = match_end;
  }
  return hits;
}

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "a",  "an", "and", "are", "as",   "at",   "be",    "by",    "for",  "from", "in", "is",
      "of", "on", "or",  "than", "that", "the", "these", "this", "those", "to",  "was", "were", "with"};
  return words;
}

bool is_acronym(const std::u32string& core) {
  if (core.size() < 2 || !is_ascii_upper(core.front())) return false;
  std::size_t upper = 0;
  for (char32_t cp : core) {
    if (is_ascii_upper(cp)) ++upper;
    else if (!is_ascii_digit(cp)) return false;
  }
  return upper >= 2;
}

bool is_year(const std::u32string& core) {
  return core.size() == 4 && (core.substr(0, 2) == U"19" || core.substr(0, 2) == U"20") &&
         std::all_of(core.begin(), core.end(), is_ascii_digit);
}

bool is_marked_compound(const std::u32string& core) {
  if (core.find(U'-') == std::u32string::npos) return false;
  bool marked = false;
  std::size_t start = 0;
  while (start <= core.size()) {
    std::size_t dash = core.find(U'-', start);
    if (dash == std::u32string::npos) dash = core.size();
    const std::u32string seg = core.substr(start, dash - start);
    if (seg.empty() || !std::all_of(seg.begin(), seg.end(), [](char32_t cp) { return unicode::is_alnum(cp); })) {
      return false;
    }
    const bool digit = std::any_of(seg.begin(), seg.end(), is_ascii_digit);
    const std::size_t caps = static_cast<std::size_t>(std::count_if(seg.begin(), seg.end(), is_ascii_upper));
    const bool all_caps = caps >= 2 && std::all_of(seg.begin(), seg.end(), [](char32_t cp) {
                            return is_ascii_upper(cp) || is_ascii_digit(cp);
                          });
    marked |= digit || all_caps;
    start = dash + 1;
  }
  return marked;
}

bool is_percentage(const std::u32string& core) {
  if (core.size() < 2 || core.back() != U'%') return false;
  const std::u32string num = core.substr(0, core.size() - 1);
  std::size_t i = 0;
  while (i < num.size() && is_ascii_digit(num[i])) ++i;
  if (i == 0) return false;
  if (i == num.size()) return true;
  if (num[i] != U'.' && num[i] != U',') return false;
  const std::size_t frac = i + 1;
  if (frac == num.size()) return false;
  return std::all_of(num.begin() + static_cast<std::ptrdiff_t>(frac), num.end(), is_ascii_digit);
}

std::vector<Hit> pattern_hits(std::string_view text, const std::vector<std::size_t>& offsets) {
  auto cp_index = [&](std::size_t byte) {
    return static_cast<std::size_t>(std::lower_bound(offsets.begin(), offsets.end(), byte) - offsets.begin());
  };
  const std::vector<WordSpan> spans = word_spans(text);
  std::vector<std::u32string> cores;
  cores.reserve(spans.size());
  for (const WordSpan& s : spans) cores.push_back(unicode::decode(text.substr(s.core_begin, s.core_end - s.core_begin)));

  std::vector<Hit> hits;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const WordSpan& s = spans[i];
    const std::u32string& core = cores[i];
    if (core.empty()) continue;
    const bool has_next = i + 1 < spans.size() && s.core_end == s.end && spans[i + 1].core_begin == spans[i + 1].begin;
    if (is_acronym(core)) {
      std::size_t end = s.core_end;
      if (has_next && is_year(cores[i + 1])) end = spans[++i].core_end;
      hits.push_back(Hit{cp_index(s.core_begin), cp_index(end), TermSource::Pattern});
    } else if (is_marked_compound(core)) {
      hits.push_back(Hit{cp_index(s.core_begin), cp_index(s.core_end), TermSource::Pattern});
    } else if (is_percentage(core) && has_next) {
      const std::u32string& noun = cores[i + 1];
      const bool alphabetic =
          !noun.empty() && std::all_of(noun.begin(), noun.end(), [](char32_t cp) { return unicode::is_alpha(cp); });
      if (alphabetic && stopwords().count(unicode::to_lower(unicode::encode(noun))) == 0) {
        hits.push_back(Hit{cp_index(s.core_begin), cp_index(spans[i + 1].core_end), TermSource::Pattern});
        ++i;
      }
    }
  }
  return hits;
}

int rank(TermSource s) { return static_cast<int>(s); }

// One term per normalized form: best source first, then earliest position.
// Spanned terms come out in document order, spanless ones after them in input order.
std::vector<Term> merge_terms(std::vector<Term> terms) {
  std::unordered_map<std::string, std::size_t> best;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto [it, inserted] = best.emplace(terms[i].normalized, i);
    if (inserted) continue;
    const Term& cur = terms[it->second];
    const Term& cand = terms[i];
    const bool better = rank(cand.source) < rank(cur.source) ||
                        (rank(cand.source) == rank(cur.source) && cand.span && cur.span &&
                         cand.span->start < cur.span->start);
    if (better) it->second = i;
  }
  std::vector<std::size_t> keep;
  keep.reserve(best.size());
  for (const auto& [_, idx] : best) keep.push_back(idx);
  std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    const Term& x = terms[a];
    const Term& y = terms[b];
    if (x.span.has_value() != y.span.has_value()) return x.span.has_value();
    if (x.span && y.span && x.span->start != y.span->start) return x.span->start < y.span->start;
    return a < b;
  });
  std::vector<Term> out;
  out.reserve(keep.size());
  for (std::size_t idx : keep) out.push_back(std::move(terms[idx]));
  return out;
}

KnownForms corpus_forms(const TermLexicon& lexicon, const std::vector<Term>& terms) {
  KnownForms known = lexicon.known_forms();
  for (const Term& t : terms) known.insert(base_normalize(t.surface));
  return known;
}

}  // namespace

std::vector<Term> extract_rule_based(const Document& doc, const TermLexicon& lexicon) {
  if (doc.text.empty()) throw Error(ErrorCode::Precondition, "cannot extract terms from an empty document");
  const std::u32string cps = unicode::decode(doc.text);
  const Folded folded = fold(cps);
  std::vector<Hit> dict = dictionary_hits(folded, lexicon.entries(doc.lang));

  const std::vector<std::size_t> offsets = unicode::codepoint_offsets(doc.text);
  std::vector<Hit> hits = dict;
  for (const Hit& h : pattern_hits(doc.text, offsets)) {
    const bool overlaps = std::any_of(dict.begin(), dict.end(), [&](const Hit& d) {
      return h.start < d.end && d.start < h.end;
    });
    if (!overlaps) hits.push_back(h);
  }

  std::vector<Term> terms;
  terms.reserve(hits.size());
  for (const Hit& h : hits) {
    std::string surface = unicode::encode(std::u32string_view(cps).substr(h.start, h.end - h.start));
    terms.push_back(Term{surface, std::string(), doc.lang, Span{h.start, h.end}, h.source});
  }
  renormalize(terms, corpus_forms(lexicon, terms));
  terms.erase(std::remove_if(terms.begin(), terms.end(), [](const Term& t) { return t.normalized.empty(); }),
              terms.end());
  return merge_terms(std::move(terms));
}

std::vector<Term> terms_from_surfaces(const Document& doc, const std::vector<std::string>& surfaces,
                                      TermSource source, const KnownForms* known) {
  const Folded folded = fold(unicode::decode(doc.text));
  std::vector<Term> terms;
  for (const std::string& surface : surfaces) {
    std::string normalized = normalize_term(surface, known);
    if (normalized.empty()) continue;
    std::optional<Span> span;
    const std::u32string key = fold_key(surface);
    if (!key.empty()) {
      const std::size_t at = folded.text.find(key);
      if (at != std::u32string::npos) span = Span{folded.origin[at], folded.origin[at + key.size() - 1] + 1};
    }
    terms.push_back(Term{surface, std::move(normalized), doc.lang, span, source});
  }
  // Provider order is kept; only repeats are dropped.
  std::vector<Term> out;
  for (Term& t : terms) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Term& o) { return o.normalized == t.normalized; });
    if (!seen) out.push_back(std::move(t));
  }
  return out;
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::RuleBased: return "rule-based";
    case Strategy::Provider: return "provider";
    case Strategy::Union: return "union";
  }
  return "rule-based";
}

Strategy strategy_from_string(std::string_view raw) {
  if (raw == "rule-based") return Strategy::RuleBased;
  if (raw == "provider") return Strategy::Provider;
  if (raw == "union") return Strategy::Union;
  throw ConfigError(fmt::format("unknown extraction strategy '{}' (expected rule-based, provider or union)", raw));
}

std::vector<Term> extract(const Document& doc, Strategy strategy, const TermLexicon& lexicon,
                          ExtractionProvider* provider) {
  if (doc.text.empty()) throw Error(ErrorCode::Precondition, "cannot extract terms from an empty document");
  if (strategy == Strategy::RuleBased) return extract_rule_based(doc, lexicon);
  if (provider == nullptr) {
    throw Error(ErrorCode::Precondition,
                fmt::format("extraction strategy '{}' needs an extraction provider", to_string(strategy)));
  }
  ExtractionOutput output = extract_terms_via_provider(*provider, doc);
  std::vector<std::string> surfaces;
  if (const auto* list = std::get_if<TermList>(&output)) {
    surfaces = *list;
  } else {
    for (const AlignedTriple& t : std::get<TripleList>(output)) {
      if (doc.stage == Stage::Source) surfaces.push_back(t.en);
      else if (doc.stage == Stage::Intermediate && t.l2) surfaces.push_back(*t.l2);
      else if (doc.stage == Stage::BackTranslated && t.eny) surfaces.push_back(*t.eny);
    }
  }
  const TermSource source = provider->kind() == ExtractionKind::RuleBased ? TermSource::Dictionary
                                                                           : TermSource::Provider;
  std::vector<Term> from_provider = terms_from_surfaces(doc, surfaces, source);
  if (strategy == Strategy::Provider) {
    renormalize(from_provider, corpus_forms(lexicon, from_provider));
    return from_provider;
  }
  std::vector<Term> merged = extract_rule_based(doc, lexicon);
  merged.insert(merged.end(), from_provider.begin(), from_provider.end());
  renormalize(merged, corpus_forms(lexicon, merged));
  return merge_terms(std::move(merged));
}

ExtractionOutput RuleBasedExtractor::extract(const Document& doc) {
  TermList out;
  for (const Term& t : extract_rule_based(doc, lexicon_)) out.push_back(t.surface);
  return out;
}

}  // namespace termbt::terms
