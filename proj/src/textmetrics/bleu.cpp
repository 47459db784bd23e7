#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "termbt/error.hpp"
#include "termbt/textmetrics.hpp"

namespace termbt::textmetrics {

namespace {

using Gram = std::vector<std::string_view>;

std::map<Gram, std::size_t> count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  std::map<Gram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    Gram g(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[g];
  }
  return counts;
}

}  // namespace

BleuScore bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
               const MetricParams& params) {
  params.validate();
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorCode::Precondition, "bleu needs at least one token on each side");
  }
  const auto max_n = static_cast<std::size_t>(params.bleu_max_n);
  BleuScore out;
  out.cand_len = candidate.size();
  out.ref_len = reference.size();
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    const std::size_t total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
    out.matches.push_back(matched);
    out.totals.push_back(total);
    out.precisions.push_back(total > 0 ? static_cast<double>(matched) / static_cast<double>(total) : 0.0);
  }

  const double c = static_cast<double>(out.cand_len);
  const double r = static_cast<double>(out.ref_len);
  out.brevity_penalty = c >= r ? 1.0 : std::exp(1.0 - r / c);

  std::vector<double> weights = params.weights();
  double log_sum = 0.0;
  if (params.zero_ngram_policy == ZeroNgramPolicy::TruncateN) {
    std::size_t effective = 0;
    while (effective < max_n && out.matches[effective] > 0) ++effective;
    out.effective_n = static_cast<int>(effective);
    if (effective == 0) {
      out.score = 0.0;
      return out;
    }
    double mass = 0.0;
    for (std::size_t n = 0; n < effective; ++n) mass += weights[n];
    for (std::size_t n = 0; n < effective; ++n) {
      const double w = mass > 0.0 ? weights[n] / mass : 1.0 / static_cast<double>(effective);
      log_sum += w * std::log(out.precisions[n]);
    }
  } else {
    out.effective_n = params.bleu_max_n;
    for (std::size_t n = 0; n < max_n; ++n) {
      log_sum += weights[n] * std::log(std::max(out.precisions[n], params.floor_epsilon));
    }
  }
  out.score = std::clamp(out.brevity_penalty * std::exp(log_sum), 0.0, 1.0);
  return out;
}

BleuScore bleu(const Document& candidate, const Document& reference, const MetricParams& params) {
  if (candidate.lang != reference.lang) {
    throw Error(ErrorCode::Precondition, fmt::format("bleu compares texts in one language, got '{}' and '{}'",
                                                     candidate.lang.code(), reference.lang.code()));
  }
  const auto cand = tokenize(candidate.text, params.tokenizer);
  const auto ref = tokenize(reference.text, params.tokenizer);
  return bleu(cand, ref, params);
}

}  // namespace termbt::textmetrics
