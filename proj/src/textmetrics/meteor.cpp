#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "termbt/error.hpp"
#include "termbt/textmetrics.hpp"

namespace termbt::textmetrics {

namespace {

constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

// For each candidate position, the matched reference position or kUnmatched.
// A candidate word prefers the reference slot right after the previous
// match, which keeps contiguous runs together and the chunk count low.
std::vector<std::size_t> align_unigrams(std::span<const std::string> cand, std::span<const std::string> ref,
                                        const UnigramMatcher& matcher) {
  std::vector<std::size_t> out(cand.size(), kUnmatched);
  std::vector<bool> used(ref.size(), false);
  std::size_t prev_ref = kUnmatched;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    std::size_t pick = kUnmatched;
    if (prev_ref != kUnmatched && prev_ref + 1 < ref.size() && !used[prev_ref + 1] &&
        matcher.matches(cand[i], ref[prev_ref + 1])) {
      pick = prev_ref + 1;
    }
    for (std::size_t j = 0; j < ref.size() && pick == kUnmatched; ++j) {
      if (!used[j] && matcher.matches(cand[i], ref[j])) pick = j;
    }
    if (pick != kUnmatched) {
      used[pick] = true;
      out[i] = pick;
    }
    prev_ref = pick;
  }
  return out;
}

}  // namespace

MeteorScore meteor(std::span<const std::string> candidate, std::span<const std::string> reference,
                   const MetricParams& params, const UnigramMatcher* matcher) {
  params.validate();
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorCode::Precondition, "meteor needs at least one token on each side");
  }
  static const ExactMatcher exact;
  const std::vector<std::size_t> alignment = align_unigrams(candidate, reference, matcher ? *matcher : exact);

  MeteorScore out;
  std::size_t prev_cand = kUnmatched;
  std::size_t prev_ref = kUnmatched;
  for (std::size_t i = 0; i < alignment.size(); ++i) {
    if (alignment[i] == kUnmatched) continue;
    ++out.matches;
    const bool continues = prev_cand != kUnmatched && prev_cand + 1 == i && prev_ref + 1 == alignment[i];
    if (!continues) ++out.chunks;
    prev_cand = i;
    prev_ref = alignment[i];
  }
  if (out.matches == 0) return out;

  const double m = static_cast<double>(out.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double a = params.meteor_alpha;
  out.precision = p;
  out.recall = r;
  out.penalty = std::pow(static_cast<double>(out.chunks) / m, 3.0);
  const double fragmentation = std::max(0.0, 1.0 - params.meteor_gamma * out.penalty);
  const double weighted = a * p + (1.0 - a) * r;
  if (params.meteor_form == MeteorForm::AsPrinted) {
    out.f_mean = 10.0 * p * r / (r + 9.0 * p);
    out.score = fragmentation * out.f_mean / weighted;
  } else {
    out.f_mean = p * r / weighted;
    out.score = fragmentation * out.f_mean;
  }
  return out;
}

MeteorScore meteor(const Document& candidate, const Document& reference, const MetricParams& params,
                   const UnigramMatcher* matcher) {
  if (candidate.lang != reference.lang) {
    throw Error(ErrorCode::Precondition, fmt::format("meteor compares texts in one language, got '{}' and '{}'",
                                                     candidate.lang.code(), reference.lang.code()));
  }
  return meteor(tokenize(candidate.text, params.tokenizer), tokenize(reference.text, params.tokenizer), params,
                matcher);
}

}  // namespace termbt::textmetrics
