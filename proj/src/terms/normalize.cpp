#include <fmt/format.h>

#include "termbt/error.hpp"
#include "termbt/terms.hpp"
#include "termbt/unicode.hpp"

namespace termbt::terms {

namespace {

char32_t closer_for(char32_t open) {
  switch (open) {
    case U'(': return U')';
    case U'[': return U']';
    case U'{': return U'}';
    default: return 0;
  }
}

char32_t opener_for(char32_t close) {
  switch (close) {
    case U')': return U'(';
    case U']': return U'[';
    case U'}': return U'{';
    default: return 0;
  }
}

std::u32string collapse_and_trim(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  bool pending = false;
  for (char32_t cp : in) {
    if (unicode::is_space(cp)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(U' ');
    pending = false;
    out.push_back(cp);
  }
  return out;
}

// True when s[0] opens a bracket that closes exactly at the last character.
bool wrapped(const std::u32string& s) {
  if (s.size() < 2) return false;
  const char32_t open = s.front();
  const char32_t close = closer_for(open);
  if (close == 0 || s.back() != close) return false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == open) ++depth;
    else if (s[i] == close) --depth;
    if (depth == 0 && i + 1 < s.size()) return false;
  }
  return true;
}

std::u32string strip_edges(std::u32string s) {
  while (wrapped(s)) s = s.substr(1, s.size() - 2);
  while (!s.empty()) {
    const char32_t first = s.front();
    if (!unicode::is_edge_punct(first)) break;
    if (char32_t close = closer_for(first); close != 0 && s.find(close, 1) != std::u32string::npos) break;
    s.erase(s.begin());
  }
  while (!s.empty()) {
    const char32_t last = s.back();
    if (!unicode::is_edge_punct(last)) break;
    if (char32_t open = opener_for(last); open != 0 && s.size() > 1 && s.rfind(open, s.size() - 2) != std::u32string::npos) {
      break;
    }
    s.pop_back();
  }
  return s;
}

bool is_ascii_letter(char32_t cp) { return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z'); }

}  // namespace

std::string_view to_string(TermSource source) {
  switch (source) {
    case TermSource::Dictionary: return "dictionary";
    case TermSource::Pattern: return "pattern";
    case TermSource::Provider: return "provider";
  }
  return "dictionary";
}

TermSource term_source_from_string(std::string_view raw) {
  if (raw == "dictionary") return TermSource::Dictionary;
  if (raw == "pattern") return TermSource::Pattern;
  if (raw == "provider") return TermSource::Provider;
  throw ConfigError(fmt::format("unknown term source '{}'", raw));
}

std::string base_normalize(std::string_view surface) {
  std::string current(surface);
  for (int guard = 0; guard < 16; ++guard) {
    std::u32string cps = unicode::decode(unicode::to_nfc(unicode::to_lower(current)));
    cps = strip_edges(collapse_and_trim(cps));
    std::string next = unicode::encode(cps);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::string normalize_term(std::string_view surface, const KnownForms* known) {
  std::string base = base_normalize(surface);
  if (known == nullptr || known->empty()) return base;
  const std::u32string cps = unicode::decode(base);
  const std::size_t token_start = cps.rfind(U' ') == std::u32string::npos ? 0 : cps.rfind(U' ') + 1;
  const std::size_t token_len = cps.size() - token_start;
  if (token_len <= 3 || cps.back() != U's') return base;
  const char32_t before = cps[cps.size() - 2];
  if (before == U's' || !is_ascii_letter(before)) return base;
  std::string singular = unicode::encode(std::u32string_view(cps).substr(0, cps.size() - 1));
  if (known->find(singular) != known->end()) return singular;
  return base;
}

void renormalize(std::vector<Term>& terms, const KnownForms& known) {
  for (Term& t : terms) t.normalized = normalize_term(t.surface, &known);
}

}  // namespace termbt::terms
