#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "termbt/lexicon.hpp"

namespace termbt {

class ChatClient;

enum class EmbeddingKind { LiveLLM, HashedBagOfCharNgrams };

/// Maps text to a fixed-length vector. Implementations must be safe to call
/// from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const std::string& id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual EmbeddingKind kind() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Bag of character n-grams hashed into `dimension` buckets and L2-normalized.
/// Text is lowercased, NFC-normalized and whitespace-collapsed first; inputs
/// shorter than n codepoints contribute one gram made of the whole string.
/// With synonym groups, group members are rewritten to their canonical form
/// before gramming, so members embed identically.
class HashedNgramEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedNgramEmbedder(std::string id = "hashed-char3", std::size_t dimension = 256,
                               std::size_t n = 3,
                               std::shared_ptr<const SynonymGroups> synonyms = nullptr);

  const std::string& id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }
  EmbeddingKind kind() const override { return EmbeddingKind::HashedBagOfCharNgrams; }
  std::vector<double> embed(std::string_view text) const override;

  std::size_t bucket(std::string_view gram) const;
  /// The preprocessed string's n-grams, in order, duplicates kept.
  std::vector<std::string> grams(std::string_view text) const;

 private:
  std::string id_;
  std::size_t dimension_;
  std::size_t n_;
  std::shared_ptr<const SynonymGroups> synonyms_;
};

/// Embeddings from a remote endpoint. The vector is read from the response
/// at the configured JSON pointer.
class LiveEmbedder final : public EmbeddingProvider {
 public:
  LiveEmbedder(std::string id, std::size_t dimension, std::shared_ptr<ChatClient> client);

  const std::string& id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }
  EmbeddingKind kind() const override { return EmbeddingKind::LiveLLM; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::string id_;
  std::size_t dimension_;
  std::shared_ptr<ChatClient> client_;
};

/// Lowercase, NFC, collapse whitespace runs to one space, trim.
std::string embedding_preprocess(std::string_view text);

}  // namespace termbt
