#include "termbt/core.hpp"

#include <fmt/format.h>

#include <cctype>

#include "termbt/digest.hpp"
#include "termbt/error.hpp"

namespace termbt {

namespace {

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string document_id(std::string_view text, const LangTag& lang, Stage stage,
                        const Origin& origin) {
  std::string key = fmt::format("{}\x1f{}\x1f{}\x1f{}\x1f", to_string(stage), lang.code(),
                                origin.provider, origin.parent.value_or(""));
  key.append(text);
  return "d-" + sha256_hex(key).substr(0, 16);
}

}  // namespace

bool LangTag::valid(std::string_view raw) {
  std::size_t i = 0;
  std::size_t primary = 0;
  while (i < raw.size() && is_ascii_letter(raw[i])) ++i, ++primary;
  if (primary == 0) return false;
  if (i == raw.size()) return true;
  if (raw[i] != '-') return false;
  ++i;
  std::size_t region = 0;
  while (i < raw.size() && is_ascii_letter(raw[i])) ++i, ++region;
  return region > 0 && i == raw.size();
}

LangTag LangTag::parse(std::string_view raw) {
  if (!valid(raw)) {
    throw ConfigError(fmt::format("invalid language tag '{}' (expected letters with optional -region)", raw));
  }
  std::string code(raw);
  for (char& c : code) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return LangTag(std::move(code));
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Source: return "source";
    case Stage::Intermediate: return "intermediate";
    case Stage::BackTranslated: return "back_translated";
  }
  return "source";
}

Stage stage_from_string(std::string_view raw) {
  if (raw == "source") return Stage::Source;
  if (raw == "intermediate") return Stage::Intermediate;
  if (raw == "back_translated") return Stage::BackTranslated;
  throw ConfigError(fmt::format("unknown document stage '{}'", raw));
}

Document Document::source(std::string text, LangTag lang) {
  if (text.empty()) throw Error(ErrorCode::Precondition, "source document text is empty");
  Origin origin{std::string(kInputOrigin), std::nullopt};
  std::string id = document_id(text, lang, Stage::Source, origin);
  return Document{std::move(id), std::move(text), std::move(lang), Stage::Source, std::move(origin)};
}

Document Document::derive(std::string text, LangTag lang, Stage stage, std::string provider) const {
  Origin child_origin{std::move(provider), id};
  std::string child_id = document_id(text, lang, stage, child_origin);
  return Document{std::move(child_id), std::move(text), std::move(lang), stage, std::move(child_origin)};
}

std::string_view to_string(Topology topology) {
  return topology == Topology::Parallel ? "parallel" : "serial";
}

Topology topology_from_string(std::string_view raw) {
  if (raw == "parallel") return Topology::Parallel;
  if (raw == "serial") return Topology::Serial;
  throw ConfigError(fmt::format("unknown topology '{}' (expected parallel or serial)", raw));
}

std::vector<LangTag> BtPath::intermediate_langs() const {
  std::vector<LangTag> out;
  for (std::size_t i = 0; i + 1 < hops.size(); ++i) out.push_back(hops[i].to);
  return out;
}

BtPath make_path(std::string label, const std::vector<LangTag>& route,
                 const std::vector<std::string>& providers) {
  if (route.size() < 2) throw PathError(fmt::format("path '{}': route needs at least two languages", label));
  if (providers.size() != route.size() - 1) {
    throw PathError(fmt::format("path '{}': {} hops but {} providers", label, route.size() - 1,
                                providers.size()));
  }
  BtPath path;
  path.label = std::move(label);
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    path.hops.push_back(Hop{route[i], route[i + 1], providers[i]});
  }
  path.topology = path.hops.size() == 2 ? Topology::Parallel : Topology::Serial;
  return path;
}

void validate_path(const BtPath& path) {
  const std::string prefix = path.label.empty() ? "path" : fmt::format("path '{}'", path.label);
  if (path.hops.empty()) throw PathError(prefix + ": empty hop list");
  for (std::size_t i = 1; i < path.hops.size(); ++i) {
    if (path.hops[i].from != path.hops[i - 1].to) {
      throw PathError(fmt::format("{}: chain break at hop {} (expected from '{}', got '{}')", prefix,
                                  i + 1, path.hops[i - 1].to.code(), path.hops[i].from.code()));
    }
  }
  if (path.hops.back().to != path.hops.front().from) {
    throw PathError(fmt::format("{}: endpoint mismatch (starts at '{}', ends at '{}')", prefix,
                                path.hops.front().from.code(), path.hops.back().to.code()));
  }
  if (path.hops.size() < 2) {
    throw PathError(prefix + ": a back-translation path needs at least 2 hops");
  }
  if (path.topology == Topology::Parallel && path.hops.size() != 2) {
    throw PathError(fmt::format("{}: parallel topology requires exactly 2 hops, got {}", prefix,
                                path.hops.size()));
  }
}

}  // namespace termbt
