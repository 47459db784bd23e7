#include "termbt/lexicon.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "termbt/error.hpp"
#include "termbt/unicode.hpp"

namespace termbt {

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }

  // Decode the codepoint at pos without advancing; returns its byte length.
  char32_t peek(std::size_t& length) const {
    std::size_t n = 1;
    const auto lead = static_cast<unsigned char>(text[pos]);
    if (lead >= 0xF0) n = 4;
    else if (lead >= 0xE0) n = 3;
    else if (lead >= 0xC0) n = 2;
    n = std::min(n, text.size() - pos);
    std::u32string cps = unicode::decode(text.substr(pos, n));
    length = n;
    return cps.empty() ? U'�' : cps.front();
  }
};

std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> key_tokens(std::string_view phrase) {
  std::vector<std::string> tokens;
  for (const WordSpan& span : word_spans(phrase)) {
    if (span.empty_core()) continue;
    tokens.push_back(unicode::to_lower(phrase.substr(span.core_begin, span.core_end - span.core_begin)));
  }
  return tokens;
}

std::string match_case(std::string_view original, std::string replacement) {
  std::u32string orig = unicode::decode(original.substr(0, std::min<std::size_t>(4, original.size())));
  if (orig.empty() || !unicode::is_upper(orig.front())) return replacement;
  std::u32string repl = unicode::decode(replacement);
  if (repl.empty()) return replacement;
  char32_t upper = unicode::simple_upper(repl.front());
  if (upper == repl.front()) return replacement;
  repl.front() = upper;
  return unicode::encode(repl);
}

template <class Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  while (!content.empty()) {
    ++line_no;
    std::size_t nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    content.remove_prefix(nl == std::string_view::npos ? content.size() : nl + 1);
    line = trim_ascii(line);
    if (line.empty() || line.front() == '#') continue;
    fn(line, line_no);
  }
}

}  // namespace

std::vector<WordSpan> word_spans(std::string_view text) {
  std::vector<WordSpan> spans;
  Cursor cur{text};
  while (!cur.done()) {
    std::size_t len = 0;
    char32_t cp = cur.peek(len);
    if (unicode::is_space(cp)) {
      cur.pos += len;
      continue;
    }
    WordSpan span;
    span.begin = cur.pos;
    std::vector<std::pair<std::size_t, char32_t>> cps;  // (offset, codepoint)
    while (!cur.done()) {
      cp = cur.peek(len);
      if (unicode::is_space(cp)) break;
      cps.emplace_back(cur.pos, cp);
      cur.pos += len;
    }
    span.end = cur.pos;
    std::size_t lo = 0;
    std::size_t hi = cps.size();
    while (lo < hi && unicode::is_edge_punct(cps[lo].second)) ++lo;
    while (hi > lo && unicode::is_edge_punct(cps[hi - 1].second)) --hi;
    span.core_begin = lo < cps.size() ? cps[lo].first : span.end;
    span.core_end = hi < cps.size() ? cps[hi].first : span.end;
    if (lo == hi) span.core_begin = span.core_end = span.end;
    spans.push_back(span);
  }
  return spans;
}

void SubstitutionLexicon::add(std::string from, std::string to) {
  std::vector<std::string> tokens = key_tokens(from);
  if (tokens.empty()) throw ConfigError(fmt::format("substitution source '{}' has no word characters", from));
  for (Key& key : keys_) {
    if (key.tokens == tokens) {
      entries_[key.entry].second = std::move(to);
      return;
    }
  }
  entries_.emplace_back(std::move(from), std::move(to));
  keys_.push_back(Key{std::move(tokens), entries_.size() - 1});
  std::stable_sort(keys_.begin(), keys_.end(),
                   [](const Key& a, const Key& b) { return a.tokens.size() > b.tokens.size(); });
}

std::string SubstitutionLexicon::apply(std::string_view text, bool keep_case) const {
  if (keys_.empty()) return std::string(text);
  const std::vector<WordSpan> spans = word_spans(text);
  std::vector<std::string> lowered;
  lowered.reserve(spans.size());
  for (const WordSpan& s : spans) {
    lowered.push_back(s.empty_core() ? std::string()
                                     : unicode::to_lower(text.substr(s.core_begin, s.core_end - s.core_begin)));
  }

  std::unordered_map<std::string_view, std::vector<const Key*>> by_first;
  for (const Key& key : keys_) by_first[key.tokens.front()].push_back(&key);

  std::string out;
  out.reserve(text.size());
  std::size_t copied = 0;
  std::size_t i = 0;
  while (i < spans.size()) {
    const Key* hit = nullptr;
    if (auto it = by_first.find(lowered[i]); it != by_first.end() && !lowered[i].empty()) {
      for (const Key* key : it->second) {  // already longest first
        const std::size_t n = key->tokens.size();
        if (i + n > spans.size()) continue;
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
          const WordSpan& s = spans[i + j];
          ok = lowered[i + j] == key->tokens[j] && (j == 0 || s.core_begin == s.begin) &&
               (j + 1 == n || s.core_end == s.end);
        }
        if (ok) {
          hit = key;
          break;
        }
      }
    }
    if (hit == nullptr) {
      ++i;
      continue;
    }
    const std::size_t n = hit->tokens.size();
    const std::size_t start = spans[i].core_begin;
    const std::size_t stop = spans[i + n - 1].core_end;
    out.append(text.substr(copied, start - copied));
    const std::string& replacement = entries_[hit->entry].second;
    out += keep_case ? match_case(text.substr(start, stop - start), replacement) : replacement;
    copied = stop;
    i += n;
  }
  out.append(text.substr(copied));
  return out;
}

SubstitutionLexicon SubstitutionLexicon::parse(std::string_view content, std::string_view origin) {
  SubstitutionLexicon lex;
  for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    std::size_t arrow = line.find("=>");
    if (arrow == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'from => to'", origin, line_no));
    }
    std::string_view from = trim_ascii(line.substr(0, arrow));
    std::string_view to = trim_ascii(line.substr(arrow + 2));
    if (from.empty()) throw ConfigError(fmt::format("{}:{}: empty substitution source", origin, line_no));
    lex.add(std::string(from), std::string(to));
  });
  return lex;
}

SubstitutionLexicon SubstitutionLexicon::load(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

void SynonymGroups::add_group(std::vector<std::string> members) {
  members.erase(std::remove_if(members.begin(), members.end(),
                               [](const std::string& m) { return key_tokens(m).empty(); }),
                members.end());
  if (members.size() < 2) throw ConfigError("synonym group needs at least two members");
  const std::string canonical = unicode::to_lower(members.front());
  for (std::size_t i = 1; i < members.size(); ++i) rewrite_.add(members[i], canonical);
  groups_.push_back(std::move(members));
}

std::string SynonymGroups::canonicalize(std::string_view text) const {
  return rewrite_.apply(text, false);
}

SynonymGroups SynonymGroups::parse(std::string_view content, std::string_view origin) {
  SynonymGroups groups;
  for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    std::vector<std::string> members;
    while (true) {
      std::size_t bar = line.find('|');
      std::string_view member = trim_ascii(line.substr(0, bar));
      if (!member.empty()) members.emplace_back(member);
      if (bar == std::string_view::npos) break;
      line.remove_prefix(bar + 1);
    }
    if (members.size() < 2) {
      throw ConfigError(fmt::format("{}:{}: a synonym group needs at least two members", origin, line_no));
    }
    groups.add_group(std::move(members));
  });
  return groups;
}

SynonymGroups SynonymGroups::load(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, fmt::format("error while reading '{}'", path.string()));
  return std::move(buf).str();
}

}  // namespace termbt
