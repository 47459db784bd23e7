#include "termbt/embedding.hpp"

#include <fmt/format.h>

#include <cmath>

#include "termbt/chat.hpp"
#include "termbt/error.hpp"
#include "termbt/unicode.hpp"

namespace termbt {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string embedding_preprocess(std::string_view text) {
  const std::u32string cps = unicode::decode(unicode::to_nfc(unicode::to_lower(text)));
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (unicode::is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return unicode::encode(out);
}

HashedNgramEmbedder::HashedNgramEmbedder(std::string id, std::size_t dimension, std::size_t n,
                                         std::shared_ptr<const SynonymGroups> synonyms)
    : id_(std::move(id)), dimension_(dimension), n_(n), synonyms_(std::move(synonyms)) {
  if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
  if (n_ == 0) throw ConfigError("n-gram order must be positive");
}

std::size_t HashedNgramEmbedder::bucket(std::string_view gram) const {
  const std::uint64_t mixed = fnv1a64(gram) * 0x9E3779B97F4A7C15ULL;
  return static_cast<std::size_t>((mixed >> 32) % dimension_);
}

std::vector<std::string> HashedNgramEmbedder::grams(std::string_view text) const {
  std::string prepared = embedding_preprocess(text);
  if (synonyms_ && !synonyms_->empty()) prepared = embedding_preprocess(synonyms_->canonicalize(prepared));
  std::vector<std::string> out;
  if (prepared.empty()) return out;
  const std::vector<std::size_t> offsets = unicode::codepoint_offsets(prepared);
  const std::size_t count = offsets.size() - 1;
  if (count < n_) {
    out.push_back(prepared);
    return out;
  }
  out.reserve(count - n_ + 1);
  for (std::size_t i = 0; i + n_ <= count; ++i) {
    out.push_back(prepared.substr(offsets[i], offsets[i + n_] - offsets[i]));
  }
  return out;
}

std::vector<double> HashedNgramEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  for (const std::string& g : grams(text)) v[bucket(g)] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

LiveEmbedder::LiveEmbedder(std::string id, std::size_t dimension, std::shared_ptr<ChatClient> client)
    : id_(std::move(id)), dimension_(dimension), client_(std::move(client)) {}

std::vector<double> LiveEmbedder::embed(std::string_view text) const {
  if (text.empty()) return std::vector<double>(dimension_, 0.0);
  std::vector<double> v = client_->embed(text);
  if (v.size() != dimension_) {
    throw ProviderError(ErrorCode::Parse, id_,
                        fmt::format("expected {} embedding values, got {}", dimension_, v.size()), false);
  }
  return v;
}

}  // namespace termbt
