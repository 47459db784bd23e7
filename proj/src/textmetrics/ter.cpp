#include <fmt/format.h>

#include <algorithm>
#include <limits>

#include "termbt/error.hpp"
#include "termbt/textmetrics.hpp"

namespace termbt::textmetrics {

namespace {

constexpr std::size_t kMaxShiftSpan = 10;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Alignment {
  std::size_t distance = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t substitutions = 0;
  std::vector<std::size_t> hyp_to_ref;  // ref index for exact matches, kNone otherwise
  std::vector<std::size_t> ref_to_hyp;  // hyp position where each ref word lands
};

std::vector<std::size_t> edit_table(std::span<const std::string> hyp, std::span<const std::string> ref) {
  const std::size_t m = hyp.size();
  const std::size_t n = ref.size();
  std::vector<std::size_t> dp((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return dp[i * (n + 1) + j]; };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  return dp;
}

Alignment align(std::span<const std::string> hyp, std::span<const std::string> ref) {
  const std::size_t m = hyp.size();
  const std::size_t n = ref.size();
  const std::vector<std::size_t> dp = edit_table(hyp, ref);
  auto at = [&](std::size_t i, std::size_t j) { return dp[i * (n + 1) + j]; };
  Alignment a;
  a.distance = at(m, n);
  a.hyp_to_ref.assign(m, kNone);
  a.ref_to_hyp.assign(n, 0);
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = hyp[i - 1] == ref[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (same) a.hyp_to_ref[i - 1] = j - 1;
        else ++a.substitutions;
        a.ref_to_hyp[j - 1] = i - 1;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++a.deletions;
      --i;
      continue;
    }
    ++a.insertions;
    a.ref_to_hyp[j - 1] = i;
    --j;
  }
  return a;
}

std::vector<std::string> move_span(std::span<const std::string> hyp, std::size_t start, std::size_t len,
                                   std::size_t dest) {
  std::vector<std::string> rest;
  rest.reserve(hyp.size());
  rest.insert(rest.end(), hyp.begin(), hyp.begin() + static_cast<std::ptrdiff_t>(start));
  rest.insert(rest.end(), hyp.begin() + static_cast<std::ptrdiff_t>(start + len), hyp.end());
  const std::size_t insert_at = dest > start ? dest - len : dest;
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(insert_at),
              hyp.begin() + static_cast<std::ptrdiff_t>(start),
              hyp.begin() + static_cast<std::ptrdiff_t>(start + len));
  return rest;
}

}  // namespace

std::size_t word_levenshtein(std::span<const std::string> candidate, std::span<const std::string> reference) {
  return edit_table(candidate, reference).back();
}

TerScore ter(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (reference.empty()) throw Error(ErrorCode::Precondition, "ter needs a non-empty reference");
  std::vector<std::string> hyp(candidate.begin(), candidate.end());
  TerScore out;
  out.ref_len = reference.size();

  Alignment current = align(hyp, reference);
  for (std::size_t round = 0; round <= candidate.size(); ++round) {
    std::size_t best_distance = current.distance;
    std::vector<std::string> best_hyp;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      for (std::size_t len = 1; len <= kMaxShiftSpan && i + len <= hyp.size(); ++len) {
        for (std::size_t k = 0; k + len <= reference.size(); ++k) {
          if (!std::equal(hyp.begin() + static_cast<std::ptrdiff_t>(i),
                          hyp.begin() + static_cast<std::ptrdiff_t>(i + len),
                          reference.begin() + static_cast<std::ptrdiff_t>(k))) {
            continue;
          }
          bool in_place = true;
          for (std::size_t t = 0; t < len && in_place; ++t) in_place = current.hyp_to_ref[i + t] == k + t;
          if (in_place) continue;
          const std::size_t dest = current.ref_to_hyp[k];
          if (dest >= i && dest <= i + len) continue;
          std::vector<std::string> moved = move_span(hyp, i, len, dest);
          const std::size_t d = word_levenshtein(moved, reference);
          // A shift costs one edit, so it has to save at least two.
          if (d + 1 < best_distance) {
            best_distance = d + 1;
            best_hyp = std::move(moved);
          }
        }
      }
    }
    if (best_hyp.empty()) break;
    hyp = std::move(best_hyp);
    ++out.shifts;
    current = align(hyp, reference);
  }

  out.insertions = current.insertions;
  out.deletions = current.deletions;
  out.substitutions = current.substitutions;
  out.score = static_cast<double>(out.edits()) / static_cast<double>(out.ref_len);
  return out;
}

TerScore ter(const Document& candidate, const Document& reference, const MetricParams& params) {
  if (candidate.lang != reference.lang) {
    throw Error(ErrorCode::Precondition, fmt::format("ter compares texts in one language, got '{}' and '{}'",
                                                     candidate.lang.code(), reference.lang.code()));
  }
  return ter(tokenize(candidate.text, params.tokenizer), tokenize(reference.text, params.tokenizer));
}

}  // namespace termbt::textmetrics
