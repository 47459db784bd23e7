#include <fmt/format.h>

#include <algorithm>

#include "termbt/error.hpp"
#include "termbt/lexicon.hpp"
#include "termbt/terms.hpp"

namespace termbt::terms {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void TermLexicon::add(const LangTag& lang, std::string_view term) {
  std::string norm = base_normalize(term);
  if (norm.empty()) return;
  entries_[lang].insert(std::move(norm));
}

void TermLexicon::add_pair(std::string_view source_term, const LangTag& lang, std::string_view target_term) {
  std::string src = base_normalize(source_term);
  std::string tgt = base_normalize(target_term);
  if (src.empty() || tgt.empty()) return;
  entries_[lang].insert(tgt);
  pairs_.emplace(std::move(src), lang.code(), std::move(tgt));
}

bool TermLexicon::contains(const LangTag& lang, std::string_view normalized) const {
  auto it = entries_.find(lang);
  return it != entries_.end() && it->second.count(std::string(normalized)) > 0;
}

bool TermLexicon::has_pair(std::string_view source_term, const LangTag& lang, std::string_view target_term) const {
  return pairs_.count({std::string(source_term), lang.code(), std::string(target_term)}) > 0;
}

bool TermLexicon::has_pairs_for(const LangTag& lang) const {
  return std::any_of(pairs_.begin(), pairs_.end(),
                     [&](const auto& p) { return std::get<1>(p) == lang.code(); });
}

const std::set<std::string>& TermLexicon::entries(const LangTag& lang) const {
  static const std::set<std::string> none;
  auto it = entries_.find(lang);
  return it == entries_.end() ? none : it->second;
}

std::vector<LangTag> TermLexicon::languages() const {
  std::vector<LangTag> out;
  for (const auto& [lang, _] : entries_) out.push_back(lang);
  return out;
}

std::size_t TermLexicon::size() const {
  std::size_t n = 0;
  for (const auto& [_, set] : entries_) n += set.size();
  return n;
}

KnownForms TermLexicon::known_forms() const {
  KnownForms out;
  for (const auto& [_, set] : entries_) out.insert(set.begin(), set.end());
  return out;
}

void TermLexicon::merge(const TermLexicon& other) {
  for (const auto& [lang, set] : other.entries_) entries_[lang].insert(set.begin(), set.end());
  pairs_.insert(other.pairs_.begin(), other.pairs_.end());
  provenance_.insert(provenance_.end(), other.provenance_.begin(), other.provenance_.end());
}

TermLexicon TermLexicon::parse(std::string_view content, const LangTag& lang, bool pairs, std::string_view origin) {
  TermLexicon lex;
  std::size_t line_no = 0;
  while (!content.empty()) {
    ++line_no;
    const std::size_t nl = content.find('\n');
    std::string_view line = trim(content.substr(0, nl));
    content.remove_prefix(nl == std::string_view::npos ? content.size() : nl + 1);
    if (line.empty() || line.front() == '#') continue;
    if (!pairs) {
      lex.add(lang, line);
      continue;
    }
    const std::size_t arrow = line.find("=>");
    if (arrow == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'source term => target term'", origin, line_no));
    }
    lex.add_pair(trim(line.substr(0, arrow)), lang, trim(line.substr(arrow + 2)));
  }
  lex.add_provenance(std::string(origin));
  return lex;
}

TermLexicon TermLexicon::load(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  const bool pairs = ext == ".pairs";
  if (ext != ".lex" && !pairs) {
    throw ConfigError(fmt::format("lexicon '{}' must be named <name>.<lang>.lex or <name>.<lang>.pairs",
                                  path.string()));
  }
  const std::string lang_part = path.stem().extension().string();
  if (lang_part.size() < 2) {
    throw ConfigError(fmt::format("lexicon '{}' has no language suffix (expected <name>.<lang>{})",
                                  path.string(), ext));
  }
  const LangTag lang = LangTag::parse(lang_part.substr(1));
  return parse(read_text_file(path), lang, pairs, path.string());
}

}  // namespace termbt::terms
