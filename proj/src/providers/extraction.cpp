#include "termbt/extraction.hpp"

#include <cctype>
#include <fmt/format.h>

#include <json.hpp>
#include <unordered_set>

#include "termbt/error.hpp"

namespace termbt {

namespace {

using nlohmann::json;

std::string_view strip_fences(std::string_view raw) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  raw = trim(raw);
  if (raw.substr(0, 3) == "```") {
    std::size_t nl = raw.find('\n');
    std::size_t close = raw.rfind("```");
    if (nl != std::string_view::npos && close != std::string_view::npos && close > nl) {
      raw = trim(raw.substr(nl + 1, close - nl - 1));
    }
  }
  return raw;
}

std::optional<std::string> optional_string(std::string_view provider, const json& v, std::size_t row) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) {
    throw ProviderError(ErrorCode::Parse, std::string(provider),
                        fmt::format("row {}: triple fields must be strings or null", row + 1), false);
  }
  std::string s = v.get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

}  // namespace

ExtractionOutput parse_extraction_output(std::string_view provider_id, std::string_view raw) {
  const std::string provider(provider_id);
  json doc = json::parse(strip_fences(raw), nullptr, false);
  if (doc.is_discarded()) throw ProviderError(ErrorCode::Parse, provider, "output is not valid JSON", false);
  if (!doc.is_array()) throw ProviderError(ErrorCode::Parse, provider, "output is not a JSON array", false);
  if (doc.empty()) return TermList{};

  if (doc.front().is_string()) {
    TermList terms;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (!doc[i].is_string()) {
        throw ProviderError(ErrorCode::Parse, provider,
                            fmt::format("item {} is not a string in a term list", i + 1), false);
      }
      terms.push_back(doc[i].get<std::string>());
    }
    return terms;
  }

  TripleList triples;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& row = doc[i];
    AlignedTriple t;
    if (row.is_object()) {
      if (!row.contains("en") || !row["en"].is_string()) {
        throw ProviderError(ErrorCode::Parse, provider, fmt::format("row {}: missing \"en\"", i + 1), false);
      }
      t.en = row["en"].get<std::string>();
      t.l2 = optional_string(provider, row.value("l2", json()), i);
      t.eny = optional_string(provider, row.value("eny", json()), i);
    } else if (row.is_array() && row.size() == 3 && row[0].is_string()) {
      t.en = row[0].get<std::string>();
      t.l2 = optional_string(provider, row[1], i);
      t.eny = optional_string(provider, row[2], i);
    } else {
      throw ProviderError(ErrorCode::Parse, provider,
                          fmt::format("row {} is neither a term nor a triple", i + 1), false);
    }
    if (t.en.empty()) {
      throw ProviderError(ErrorCode::Parse, provider, fmt::format("row {}: empty \"en\"", i + 1), false);
    }
    triples.push_back(std::move(t));
  }
  return triples;
}

std::string serialize_extraction_output(const ExtractionOutput& output) {
  json doc = json::array();
  if (const auto* terms = std::get_if<TermList>(&output)) {
    for (const auto& t : *terms) doc.push_back(t);
  } else {
    for (const auto& t : std::get<TripleList>(output)) {
      doc.push_back(json{{"en", t.en},
                         {"l2", t.l2 ? json(*t.l2) : json()},
                         {"eny", t.eny ? json(*t.eny) : json()}});
    }
  }
  return doc.dump();
}

ExtractionOutput dedupe(ExtractionOutput output) {
  std::unordered_set<std::string> seen;
  if (auto* terms = std::get_if<TermList>(&output)) {
    TermList out;
    for (auto& t : *terms) {
      if (seen.insert(t).second) out.push_back(std::move(t));
    }
    return out;
  }
  TripleList out;
  for (auto& t : std::get<TripleList>(output)) {
    if (seen.insert(t.en).second) out.push_back(std::move(t));
  }
  return out;
}

ExtractionOutput extract_terms_via_provider(ExtractionProvider& provider, const Document& doc) {
  if (doc.text.empty()) {
    throw Error(ErrorCode::Precondition,
                fmt::format("provider '{}': cannot extract terms from an empty document", provider.id()));
  }
  return dedupe(provider.extract(doc));
}

PromptedExtractor::PromptedExtractor(std::string id, std::shared_ptr<Completion> completion,
                                     PromptTemplate prompt, std::optional<LangTag> target)
    : id_(std::move(id)), completion_(std::move(completion)), prompt_(std::move(prompt)), target_(std::move(target)) {}

ExtractionOutput PromptedExtractor::extract(const Document& doc) {
  std::map<std::string, std::string> vars = {{"source_lang", doc.lang.code()}, {"text", doc.text}};
  vars["target_lang"] = target_ ? target_->code() : doc.lang.code();
  ChatRequest request{render_template(prompt_.system, vars), render_template(prompt_.user, vars), doc.text};
  return parse_extraction_output(id_, completion_->complete(request));
}

}  // namespace termbt
