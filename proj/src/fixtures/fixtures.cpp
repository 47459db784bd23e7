#include "termbt/fixtures.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>

#include "termbt/digest.hpp"
#include "termbt/error.hpp"
#include "termbt/unicode.hpp"

namespace termbt::fixtures {

namespace {

using json = nlohmann::json;

const LangTag& english() {
  static const LangTag en = LangTag::parse("en");
  return en;
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / "MANIFEST.sha256";
  std::string content;
  try {
    content = read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::Fixture, fmt::format("fixture manifest missing: {}", path.string()));
  }
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t sp = line.find("  ");
    if (sp == std::string_view::npos) throw Error(ErrorCode::Fixture, fmt::format("bad manifest line '{}'", line));
    out.emplace(std::string(line.substr(sp + 2)), std::string(line.substr(0, sp)));
  }
  return out;
}

std::string to_lower_ascii_first(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

// The table capitalizes every row. Where the excerpt writes the term in
// lowercase the replayed rendering follows the excerpt.
std::string excerpt_case(const FixtureSet& f, const TermTriple& t, const std::string& rendering) {
  const std::string& text = f.source_excerpt.text;
  const std::string decapped = to_lower_ascii_first(t.en);
  if (decapped != t.en && text.find(decapped) != std::string::npos) return to_lower_ascii_first(rendering);
  return rendering;
}

std::map<LangTag, Document> read_intermediates(const json& j, const Document& source) {
  std::map<LangTag, Document> out;
  for (const auto& [lang, text] : j.items()) {
    LangTag tag = LangTag::parse(lang);
    out.emplace(tag, source.derive(text.get<std::string>(), tag, Stage::Intermediate, "fixture"));
  }
  return out;
}

// Back-translations hang off the matching intermediate excerpt when the
// table prints one.
std::map<LangTag, Document> read_back_translations(const json& j, const Document& source,
                                                   const std::map<LangTag, Document>& intermediates) {
  std::map<LangTag, Document> out;
  for (const auto& [lang, text] : j.items()) {
    LangTag tag = LangTag::parse(lang);
    auto parent = intermediates.find(tag);
    const Document& from = parent == intermediates.end() ? source : parent->second;
    out.emplace(tag, from.derive(text.get<std::string>(), source.lang, Stage::BackTranslated, "fixture"));
  }
  return out;
}

FixtureSet parse_fixture(const json& j, std::string_view name) {
  if (j.at("name").get<std::string>() != name) {
    throw Error(ErrorCode::Fixture, fmt::format("fixture file names '{}', expected '{}'", j.at("name").get<std::string>(), name));
  }
  const json& src = j.at("source");
  FixtureSet f{std::string(name),
               Document::source(src.at("text").get<std::string>(), LangTag::parse(src.at("lang").get<std::string>())),
               {},
               {},
               {},
               {},
               {},
               {}};
  f.intermediate_excerpts = read_intermediates(j.at("intermediate_excerpts"), f.source_excerpt);
  f.bt_excerpts = read_back_translations(j.at("bt_excerpts"), f.source_excerpt, f.intermediate_excerpts);
  for (const auto& lang : j.at("term_langs")) f.term_langs.push_back(LangTag::parse(lang.get<std::string>()));

  const std::optional<std::string> omitted =
      j.at("omission_marker").is_null() ? std::nullopt : std::optional(j.at("omission_marker").get<std::string>());
  const std::optional<std::string> same =
      j.at("same_marker").is_null() ? std::nullopt : std::optional(j.at("same_marker").get<std::string>());

  for (const json& row : j.at("term_triples")) {
    TermTriple t;
    t.en = row.at("en").get<std::string>();
    if (row.contains("l2")) {
      for (const auto& [lang, v] : row.at("l2").items()) {
        std::string s = v.get<std::string>();
        t.l2.emplace(LangTag::parse(lang), omitted && s == *omitted ? std::nullopt : std::optional(s));
      }
    }
    for (const auto& [lang, v] : row.at("eny").items()) {
      std::string s = v.get<std::string>();
      t.eny.emplace(LangTag::parse(lang), same && s == *same ? t.en : s);
    }
    if (row.contains("consistency")) t.consistency = row.at("consistency").get<std::string>();
    if (row.contains("observation")) t.observation = row.at("observation").get<std::string>();
    t.abstract_wide = row.value("abstract_wide", false);
    for (const LangTag& lang : f.term_langs) {
      if (!t.eny.count(lang)) throw Error(ErrorCode::Fixture, fmt::format("{}: '{}' has no {} back-translation", name, t.en, lang.code()));
    }
    const std::string folded_text = unicode::to_lower(f.source_excerpt.text);
    if (!t.abstract_wide && folded_text.find(unicode::to_lower(t.en)) == std::string::npos) {
      throw Error(ErrorCode::Fixture, fmt::format("{}: term '{}' is not in the excerpt and not flagged abstract-wide", name, t.en));
    }
    f.lexicon.add(english(), t.en);
    for (const auto& [lang, v] : t.eny) f.lexicon.add(english(), v);
    for (const auto& [lang, v] : t.l2) {
      if (v) f.lexicon.add_pair(t.en, lang, *v);
    }
    f.term_triples.push_back(std::move(t));
  }
  f.lexicon.add_provenance(fmt::format("fixture:{}", name));
  for (const json& group : j.at("synonyms")) f.synonyms.add_group(group.get<std::vector<std::string>>());
  return f;
}

}  // namespace

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"he2016", "dy2023", "ling2025-terms"};
  return names;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("TERMBT_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return TERMBT_DEFAULT_DATA_DIR;
}

std::string normalize_line_endings(std::string_view content) {
  std::string out;
  out.reserve(content.size());
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\r') {
      out += '\n';
      if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
    } else {
      out += content[i];
    }
  }
  return out;
}

std::string checksum(std::string_view content) { return sha256_hex(normalize_line_endings(content)); }

FixtureSet load_fixture(std::string_view name, const std::filesystem::path& data_dir) {
  const auto& names = fixture_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw Error(ErrorCode::Fixture, fmt::format("unknown fixture '{}' (known: {})", name, fmt::join(names, ", ")));
  }
  const std::filesystem::path dir = data_dir / "fixtures";
  const std::string file = fmt::format("{}.json", name);
  const auto manifest = read_manifest(dir);
  auto expected = manifest.find(file);
  if (expected == manifest.end()) throw Error(ErrorCode::Fixture, fmt::format("{} is not listed in the manifest", file));

  std::string content;
  try {
    content = read_text_file(dir / file);
  } catch (const Error& e) {
    throw Error(ErrorCode::Fixture, e.what());
  }
  const std::string actual = checksum(content);
  if (actual != expected->second) {
    throw Error(ErrorCode::Checksum, fmt::format("{}: checksum mismatch (manifest {}, file {})", file,
                                                 expected->second.substr(0, 12), actual.substr(0, 12)));
  }
  json j = json::parse(normalize_line_endings(content), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Fixture, fmt::format("{}: not valid JSON", file));
  try {
    return parse_fixture(j, name);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Fixture, fmt::format("{}: {}", file, e.what()));
  }
}

std::string probe_text(const FixtureSet& fixture) {
  std::string out = fixture.source_excerpt.text;
  out += "\n";
  for (const TermTriple& t : fixture.term_triples) out += "\n" + t.en;
  out += "\n";
  return out;
}

std::string_view to_string(ReplayDirection direction) {
  return direction == ReplayDirection::Forward ? "forward" : "back";
}

ReplayDirection replay_direction_from_string(std::string_view raw) {
  if (raw == "forward") return ReplayDirection::Forward;
  if (raw == "back") return ReplayDirection::Back;
  throw ConfigError(fmt::format("unknown replay direction '{}' (expected forward or back)", raw));
}

SubstitutionLexicon replay_lexicon(const FixtureSet& fixture, const LangTag& lang, ReplayDirection direction) {
  if (std::find(fixture.term_langs.begin(), fixture.term_langs.end(), lang) == fixture.term_langs.end()) {
    throw ConfigError(fmt::format("fixture '{}' has no term table for '{}'", fixture.name, lang.code()));
  }
  SubstitutionLexicon lex;
  for (const TermTriple& t : fixture.term_triples) {
    const std::string eny = excerpt_case(fixture, t, t.eny.at(lang));
    auto l2 = t.l2.find(lang);
    const bool has_l2 = l2 != t.l2.end() && l2->second.has_value();
    if (direction == ReplayDirection::Forward) {
      lex.add(t.en, has_l2 ? *l2->second : eny);
    } else if (has_l2) {
      lex.add(*l2->second, eny);
    }
  }
  return lex;
}

}  // namespace termbt::fixtures
