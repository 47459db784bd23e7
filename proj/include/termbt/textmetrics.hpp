#pragma once

// Text-level similarity between an original document and its back-translation:
// BLEU, TER, METEOR, embedding F1 and whole-text cosine. Everything here is
// pure and reentrant.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "termbt/core.hpp"

namespace termbt {
class EmbeddingProvider;
}

namespace termbt::textmetrics {

enum class Tokenizer { WhitespaceLower, UnicodeWords };
enum class ZeroNgramPolicy { Floor, TruncateN };

/// Standard: (1 - gamma*Pen) * PR / (alpha*P + (1-alpha)*R), which equals
/// 10PR/(R+9P) times the penalty term at alpha = 0.9.
/// AsPrinted: (1 - gamma*Pen) * [10PR/(R+9P)] / (alpha*P + (1-alpha)*R).
/// AsPrinted can exceed 1 when precision is below recall.
enum class MeteorForm { Standard, AsPrinted };

std::string_view to_string(Tokenizer tokenizer);
Tokenizer tokenizer_from_string(std::string_view raw);
std::string_view to_string(ZeroNgramPolicy policy);
ZeroNgramPolicy zero_ngram_policy_from_string(std::string_view raw);
std::string_view to_string(MeteorForm form);
MeteorForm meteor_form_from_string(std::string_view raw);

struct MetricParams {
  int bleu_max_n = 4;
  std::vector<double> bleu_weights;  // empty means uniform 1/N
  double meteor_alpha = 0.9;
  double meteor_gamma = 0.5;
  Tokenizer tokenizer = Tokenizer::WhitespaceLower;
  ZeroNgramPolicy zero_ngram_policy = ZeroNgramPolicy::Floor;
  double floor_epsilon = 1e-9;
  MeteorForm meteor_form = MeteorForm::Standard;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
  std::vector<double> weights() const;

  friend bool operator==(const MetricParams&, const MetricParams&) = default;
};

std::vector<std::string> tokenize(std::string_view text, Tokenizer tokenizer);

struct BleuScore {
  double score = 0.0;
  std::vector<double> precisions;  // raw p_n before any floor
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  double brevity_penalty = 0.0;
  std::size_t ref_len = 0;
  std::size_t cand_len = 0;
  int effective_n = 0;  // N after TruncateN; equals max_n under Floor
};

BleuScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
               const MetricParams& params);
BleuScore bleu(const Document& candidate, const Document& reference, const MetricParams& params);

struct TerScore {
  double score = 0.0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t substitutions = 0;
  std::size_t shifts = 0;
  std::size_t ref_len = 0;

  std::size_t edits() const { return insertions + deletions + substitutions + shifts; }
};

/// Word-level Levenshtein distance with unit costs.
std::size_t word_levenshtein(std::span<const std::string> candidate,
                             std::span<const std::string> reference);

TerScore ter(std::span<const std::string> candidate, std::span<const std::string> reference);
TerScore ter(const Document& candidate, const Document& reference, const MetricParams& params);

/// Decides whether two unigrams match in METEOR's alignment stage.
class UnigramMatcher {
 public:
  virtual ~UnigramMatcher() = default;
  virtual bool matches(std::string_view candidate, std::string_view reference) const = 0;
};

class ExactMatcher final : public UnigramMatcher {
 public:
  bool matches(std::string_view candidate, std::string_view reference) const override {
    return candidate == reference;
  }
};

struct MeteorScore {
  double score = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_mean = 0.0;
  double penalty = 0.0;
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

MeteorScore meteor(std::span<const std::string> candidate, std::span<const std::string> reference,
                   const MetricParams& params, const UnigramMatcher* matcher = nullptr);
MeteorScore meteor(const Document& candidate, const Document& reference, const MetricParams& params,
                   const UnigramMatcher* matcher = nullptr);

struct SemanticF1 {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Greedy max-cosine matching of token embeddings in both directions.
/// F1 is the harmonic mean of P and R; it is 0 when P*R <= 0.
SemanticF1 semantic_f1(std::span<const std::string> candidate, std::span<const std::string> reference,
                       const EmbeddingProvider& embedder);
SemanticF1 semantic_f1(const Document& candidate, const Document& reference,
                       const EmbeddingProvider& embedder, const MetricParams& params);

/// Cosine of two vectors; 0 when either is the zero vector. Clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);
double cosine_similarity(std::string_view a, std::string_view b, const EmbeddingProvider& embedder);

struct TextScore {
  BleuScore bleu;
  TerScore ter;
  MeteorScore meteor;
  SemanticF1 semantic;
  double cosine = 0.0;
};

TextScore score_texts(const Document& candidate, const Document& reference, const MetricParams& params,
                      const EmbeddingProvider& embedder, const UnigramMatcher* matcher = nullptr);

}  // namespace termbt::textmetrics
