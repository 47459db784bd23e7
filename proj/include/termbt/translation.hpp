#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "termbt/chat.hpp"
#include "termbt/core.hpp"
#include "termbt/lexicon.hpp"

namespace termbt {

/// Fault is a test double that always fails; it lets operators and tests
/// exercise partial-failure handling without a network.
enum class TranslationKind { LiveLLM, Identity, Perturbation, Fault };

std::string_view to_string(TranslationKind kind);

class TranslationProvider {
 public:
  virtual ~TranslationProvider() = default;
  virtual const std::string& id() const = 0;
  virtual TranslationKind kind() const = 0;
  /// Text of `doc` rendered in `target`. Called through translate().
  virtual std::string render(const Document& doc, const LangTag& target) = 0;
};

/// Translate `doc` into `target`, producing a child document at `stage`.
/// Throws Error(Precondition) on empty input or on a same-language request to
/// a Live/Perturbation provider; empty provider output is a non-retryable
/// ProviderError(Refusal).
Document translate(TranslationProvider& provider, const Document& doc, const LangTag& target,
                   Stage stage);
/// Stage is BackTranslated when `target` is the source language of `doc`'s
/// chain root (callers pass it), Intermediate otherwise.
Document translate(TranslationProvider& provider, const Document& doc, const LangTag& target,
                   const LangTag& source_lang);

class IdentityTranslator final : public TranslationProvider {
 public:
  explicit IdentityTranslator(std::string id) : id_(std::move(id)) {}
  const std::string& id() const override { return id_; }
  TranslationKind kind() const override { return TranslationKind::Identity; }
  std::string render(const Document& doc, const LangTag&) override { return doc.text; }

 private:
  std::string id_;
};

/// Deterministic mock: lexicon substitution, then seeded word omission.
class PerturbationTranslator final : public TranslationProvider {
 public:
  PerturbationTranslator(std::string id, SubstitutionLexicon lexicon, double omission_probability,
                         std::uint64_t seed);
  const std::string& id() const override { return id_; }
  TranslationKind kind() const override { return TranslationKind::Perturbation; }
  std::string render(const Document& doc, const LangTag& target) override;

  /// The transformation itself, independent of documents.
  std::string perturb(std::string_view text) const;

 private:
  std::string id_;
  SubstitutionLexicon lexicon_;
  double omission_probability_;
  std::uint64_t seed_;
};

class LiveTranslator final : public TranslationProvider {
 public:
  LiveTranslator(std::string id, std::shared_ptr<ChatClient> client, PromptTemplate prompt);
  const std::string& id() const override { return id_; }
  TranslationKind kind() const override { return TranslationKind::LiveLLM; }
  std::string render(const Document& doc, const LangTag& target) override;

 private:
  std::string id_;
  std::shared_ptr<ChatClient> client_;
  PromptTemplate prompt_;
};

class FaultTranslator final : public TranslationProvider {
 public:
  FaultTranslator(std::string id, std::string message) : id_(std::move(id)), message_(std::move(message)) {}
  const std::string& id() const override { return id_; }
  TranslationKind kind() const override { return TranslationKind::Fault; }
  std::string render(const Document& doc, const LangTag& target) override;

 private:
  std::string id_;
  std::string message_;
};

}  // namespace termbt
