#include "termbt/translation.hpp"

#include <fmt/format.h>

#include <random>

#include "termbt/embedding.hpp"
#include "termbt/error.hpp"

namespace termbt {

std::string_view to_string(TranslationKind kind) {
  switch (kind) {
    case TranslationKind::LiveLLM: return "live";
    case TranslationKind::Identity: return "identity";
    case TranslationKind::Perturbation: return "perturbation";
    case TranslationKind::Fault: return "fault";
  }
  return "identity";
}

Document translate(TranslationProvider& provider, const Document& doc, const LangTag& target, Stage stage) {
  if (doc.text.empty()) {
    throw Error(ErrorCode::Precondition, fmt::format("provider '{}': input document is empty", provider.id()));
  }
  const bool cross_lingual_only =
      provider.kind() == TranslationKind::LiveLLM || provider.kind() == TranslationKind::Perturbation;
  if (cross_lingual_only && target == doc.lang) {
    throw Error(ErrorCode::Precondition,
                fmt::format("provider '{}': target language '{}' equals the document language",
                            provider.id(), target.code()));
  }
  std::string text = provider.render(doc, target);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ProviderError(ErrorCode::Refusal, provider.id(), "provider returned empty output", false);
  }
  return doc.derive(std::move(text), target, stage, provider.id());
}

Document translate(TranslationProvider& provider, const Document& doc, const LangTag& target,
                   const LangTag& source_lang) {
  return translate(provider, doc, target, target == source_lang ? Stage::BackTranslated : Stage::Intermediate);
}

PerturbationTranslator::PerturbationTranslator(std::string id, SubstitutionLexicon lexicon,
                                               double omission_probability, std::uint64_t seed)
    : id_(std::move(id)), lexicon_(std::move(lexicon)), omission_probability_(omission_probability), seed_(seed) {
  if (!(omission_probability_ >= 0.0 && omission_probability_ <= 1.0)) {
    throw ConfigError(fmt::format("provider '{}': omission_probability must be in [0, 1]", id_));
  }
}

std::string PerturbationTranslator::perturb(std::string_view text) const {
  std::string substituted = lexicon_.apply(text);
  if (omission_probability_ <= 0.0) return substituted;

  const std::vector<WordSpan> spans = word_spans(substituted);
  if (spans.empty()) return substituted;
  std::mt19937_64 rng(seed_ ^ fnv1a64(text));
  std::vector<bool> keep(spans.size(), true);
  std::size_t kept = spans.size();
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (!spans[i].empty_core() && u < omission_probability_) {
      keep[i] = false;
      --kept;
    }
  }
  if (kept == 0) keep[0] = true;

  std::string out(substituted.substr(0, spans.front().begin));
  bool first = true;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!keep[i]) continue;
    if (!first) {
      const std::size_t sep_begin = spans[i - 1].end;
      out.append(substituted, sep_begin, spans[i].begin - sep_begin);
    }
    out.append(substituted, spans[i].begin, spans[i].end - spans[i].begin);
    first = false;
  }
  out.append(substituted, spans.back().end, std::string::npos);
  return out;
}

std::string PerturbationTranslator::render(const Document& doc, const LangTag&) { return perturb(doc.text); }

LiveTranslator::LiveTranslator(std::string id, std::shared_ptr<ChatClient> client, PromptTemplate prompt)
    : id_(std::move(id)), client_(std::move(client)), prompt_(std::move(prompt)) {}

std::string LiveTranslator::render(const Document& doc, const LangTag& target) {
  const std::map<std::string, std::string> vars = {
      {"source_lang", doc.lang.code()}, {"target_lang", target.code()}, {"text", doc.text}};
  ChatRequest request{render_template(prompt_.system, vars), render_template(prompt_.user, vars), doc.text};
  return client_->complete(request);
}

std::string FaultTranslator::render(const Document&, const LangTag&) {
  throw ProviderError(ErrorCode::Refusal, id_, message_.empty() ? "injected fault" : message_, false);
}

}  // namespace termbt
