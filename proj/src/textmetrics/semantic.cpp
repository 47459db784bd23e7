#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "termbt/embedding.hpp"
#include "termbt/error.hpp"
#include "termbt/textmetrics.hpp"

namespace termbt::textmetrics {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::Precondition,
                fmt::format("cosine of vectors with different lengths ({} vs {})", a.size(), b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(std::string_view a, std::string_view b, const EmbeddingProvider& embedder) {
  const std::vector<double> va = embedder.embed(a);
  const std::vector<double> vb = embedder.embed(b);
  return cosine(va, vb);
}

SemanticF1 semantic_f1(std::span<const std::string> candidate, std::span<const std::string> reference,
                       const EmbeddingProvider& embedder) {
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorCode::Precondition, "semantic_f1 needs at least one token on each side");
  }
  std::map<std::string_view, std::vector<double>> vectors;
  for (const auto& t : candidate) vectors.try_emplace(t, std::vector<double>());
  for (const auto& t : reference) vectors.try_emplace(t, std::vector<double>());
  for (auto& [token, v] : vectors) v = embedder.embed(token);

  std::map<std::pair<std::string_view, std::string_view>, double> sim;
  auto best = [&](std::span<const std::string> from, std::span<const std::string> to) {
    double total = 0.0;
    for (const auto& x : from) {
      double top = -1.0;
      for (const auto& y : to) {
        auto key = std::make_pair(std::string_view(x), std::string_view(y));
        if (key.first > key.second) std::swap(key.first, key.second);
        auto it = sim.find(key);
        if (it == sim.end()) it = sim.emplace(key, cosine(vectors.at(x), vectors.at(y))).first;
        top = std::max(top, it->second);
      }
      total += top;
    }
    return total / static_cast<double>(from.size());
  };

  SemanticF1 out;
  out.precision = best(candidate, reference);
  out.recall = best(reference, candidate);
  const double product = out.precision * out.recall;
  out.f1 = product > 0.0 ? 2.0 * product / (out.precision + out.recall) : 0.0;
  return out;
}

SemanticF1 semantic_f1(const Document& candidate, const Document& reference, const EmbeddingProvider& embedder,
                       const MetricParams& params) {
  if (candidate.lang != reference.lang) {
    throw Error(ErrorCode::Precondition,
                fmt::format("semantic_f1 compares texts in one language, got '{}' and '{}'",
                            candidate.lang.code(), reference.lang.code()));
  }
  return semantic_f1(tokenize(candidate.text, params.tokenizer), tokenize(reference.text, params.tokenizer),
                     embedder);
}

TextScore score_texts(const Document& candidate, const Document& reference, const MetricParams& params,
                      const EmbeddingProvider& embedder, const UnigramMatcher* matcher) {
  if (candidate.lang != reference.lang) {
    throw Error(ErrorCode::Precondition, fmt::format("cannot score '{}' text against '{}' text",
                                                     candidate.lang.code(), reference.lang.code()));
  }
  const auto cand = tokenize(candidate.text, params.tokenizer);
  const auto ref = tokenize(reference.text, params.tokenizer);
  TextScore out;
  out.bleu = bleu(cand, ref, params);
  out.ter = ter(cand, ref);
  out.meteor = meteor(cand, ref, params, matcher);
  out.semantic = semantic_f1(cand, ref, embedder);
  out.cosine = cosine_similarity(candidate.text, reference.text, embedder);
  return out;
}

}  // namespace termbt::textmetrics
