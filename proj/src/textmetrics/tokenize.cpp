#include <fmt/format.h>

#include <cmath>

#include "termbt/error.hpp"
#include "termbt/lexicon.hpp"
#include "termbt/textmetrics.hpp"
#include "termbt/unicode.hpp"

namespace termbt::textmetrics {

std::string_view to_string(Tokenizer tokenizer) {
  return tokenizer == Tokenizer::WhitespaceLower ? "whitespace-lower" : "unicode-words";
}

Tokenizer tokenizer_from_string(std::string_view raw) {
  if (raw == "whitespace-lower") return Tokenizer::WhitespaceLower;
  if (raw == "unicode-words") return Tokenizer::UnicodeWords;
  throw ConfigError(fmt::format("unknown tokenizer '{}' (expected whitespace-lower or unicode-words)", raw));
}

std::string_view to_string(ZeroNgramPolicy policy) {
  return policy == ZeroNgramPolicy::Floor ? "floor" : "truncate-n";
}

ZeroNgramPolicy zero_ngram_policy_from_string(std::string_view raw) {
  if (raw == "floor") return ZeroNgramPolicy::Floor;
  if (raw == "truncate-n") return ZeroNgramPolicy::TruncateN;
  throw ConfigError(fmt::format("unknown zero_ngram_policy '{}' (expected floor or truncate-n)", raw));
}

std::string_view to_string(MeteorForm form) { return form == MeteorForm::Standard ? "standard" : "as-printed"; }

MeteorForm meteor_form_from_string(std::string_view raw) {
  if (raw == "standard") return MeteorForm::Standard;
  if (raw == "as-printed") return MeteorForm::AsPrinted;
  throw ConfigError(fmt::format("unknown meteor_form '{}' (expected standard or as-printed)", raw));
}

void MetricParams::validate() const {
  if (bleu_max_n < 1 || bleu_max_n > 8) {
    throw ConfigError(fmt::format("bleu_max_n must be in [1, 8], got {}", bleu_max_n));
  }
  if (!bleu_weights.empty()) {
    if (bleu_weights.size() != static_cast<std::size_t>(bleu_max_n)) {
      throw ConfigError(fmt::format("bleu_weights has {} entries but bleu_max_n is {}", bleu_weights.size(),
                                    bleu_max_n));
    }
    double sum = 0.0;
    for (double w : bleu_weights) {
      if (!(w >= 0.0)) throw ConfigError("bleu_weights must be non-negative");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) throw ConfigError(fmt::format("bleu_weights sum to {}, expected 1", sum));
  }
  if (!(meteor_alpha >= 0.0 && meteor_alpha <= 1.0)) {
    throw ConfigError(fmt::format("meteor_alpha must be in [0, 1], got {}", meteor_alpha));
  }
  if (!(meteor_gamma >= 0.0)) throw ConfigError(fmt::format("meteor_gamma must be >= 0, got {}", meteor_gamma));
  if (!(floor_epsilon > 0.0 && floor_epsilon < 1.0)) {
    throw ConfigError(fmt::format("floor_epsilon must be in (0, 1), got {}", floor_epsilon));
  }
}

std::vector<double> MetricParams::weights() const {
  if (!bleu_weights.empty()) return bleu_weights;
  return std::vector<double>(static_cast<std::size_t>(bleu_max_n), 1.0 / bleu_max_n);
}

std::vector<std::string> tokenize(std::string_view text, Tokenizer tokenizer) {
  const std::string lowered = unicode::to_lower(text);
  if (tokenizer == Tokenizer::UnicodeWords) return unicode::words(lowered);
  std::vector<std::string> tokens;
  for (const WordSpan& span : word_spans(lowered)) {
    if (span.empty_core()) continue;
    tokens.push_back(lowered.substr(span.begin, span.core_end - span.begin));
  }
  return tokens;
}

}  // namespace termbt::textmetrics
