#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "termbt/chat.hpp"
#include "termbt/core.hpp"

namespace termbt {

/// One provider-aligned row. Absent stages are nullopt.
struct AlignedTriple {
  std::string en;
  std::optional<std::string> l2;
  std::optional<std::string> eny;

  friend bool operator==(const AlignedTriple&, const AlignedTriple&) = default;
};

using TermList = std::vector<std::string>;
using TripleList = std::vector<AlignedTriple>;
using ExtractionOutput = std::variant<TermList, TripleList>;

enum class ExtractionKind { PromptedLLM, RuleBased };

class ExtractionProvider {
 public:
  virtual ~ExtractionProvider() = default;
  virtual const std::string& id() const = 0;
  virtual ExtractionKind kind() const = 0;
  virtual ExtractionOutput extract(const Document& doc) = 0;
};

/// Parses a provider reply: a JSON array of strings, or of triples given as
/// objects {"en","l2","eny"} or 3-element arrays. Markdown code fences around
/// the JSON are tolerated. Anything else raises ProviderError(Parse).
ExtractionOutput parse_extraction_output(std::string_view provider_id, std::string_view raw);
std::string serialize_extraction_output(const ExtractionOutput& output);

/// Drops repeated entries (by exact string, or by `en` for triples), keeping
/// the first occurrence.
ExtractionOutput dedupe(ExtractionOutput output);

/// Checks the precondition, calls the provider and dedupes its output.
ExtractionOutput extract_terms_via_provider(ExtractionProvider& provider, const Document& doc);

/// Text completion seam for prompted extraction. ChatClient is the live
/// implementation; CannedCompletion replays a fixed reply offline.
class Completion {
 public:
  virtual ~Completion() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

class ClientCompletion final : public Completion {
 public:
  explicit ClientCompletion(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}
  std::string complete(const ChatRequest& request) override { return client_->complete(request); }

 private:
  std::shared_ptr<ChatClient> client_;
};

class CannedCompletion final : public Completion {
 public:
  explicit CannedCompletion(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const ChatRequest&) override { return reply_; }

 private:
  std::string reply_;
};

class PromptedExtractor final : public ExtractionProvider {
 public:
  PromptedExtractor(std::string id, std::shared_ptr<Completion> completion, PromptTemplate prompt,
                    std::optional<LangTag> target = std::nullopt);
  const std::string& id() const override { return id_; }
  ExtractionKind kind() const override { return ExtractionKind::PromptedLLM; }
  ExtractionOutput extract(const Document& doc) override;

 private:
  std::string id_;
  std::shared_ptr<Completion> completion_;
  PromptTemplate prompt_;
  std::optional<LangTag> target_;
};

}  // namespace termbt
