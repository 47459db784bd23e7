#pragma once

// Phrase-level substitution tables shared by the perturbation translator and
// the synonym-aware embedder.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace termbt {

/// A whitespace-delimited token. [begin, end) covers the raw token bytes;
/// [core_begin, core_end) drops leading and trailing edge punctuation.
struct WordSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t core_begin = 0;
  std::size_t core_end = 0;

  bool empty_core() const { return core_begin == core_end; }
};

std::vector<WordSpan> word_spans(std::string_view text);

/// Ordered phrase -> replacement table. Matching is case-insensitive on
/// whole tokens, longest phrase first, scanning left to right. Text outside
/// the replaced regions (spacing, punctuation) is kept byte for byte.
class SubstitutionLexicon {
 public:
  void add(std::string from, std::string to);
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  /// When `keep_case` is set and the matched text starts with an uppercase
  /// letter, the replacement's first letter is uppercased too.
  std::string apply(std::string_view text, bool keep_case = true) const;

  /// One "from => to" pair per line; blank lines and '#' comments skipped.
  static SubstitutionLexicon parse(std::string_view content, std::string_view origin = "<memory>");
  static SubstitutionLexicon load(const std::filesystem::path& path);

  friend bool operator==(const SubstitutionLexicon&, const SubstitutionLexicon&) = default;

 private:
  struct Key {
    std::vector<std::string> tokens;
    std::size_t entry = 0;
    friend bool operator==(const Key&, const Key&) = default;
  };
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<Key> keys_;  // sorted by token count, longest first
};

/// Groups of interchangeable phrases. canonicalize() rewrites every member
/// to the group's first member, lowercased.
class SynonymGroups {
 public:
  void add_group(std::vector<std::string> members);
  bool empty() const { return groups_.empty(); }
  const std::vector<std::vector<std::string>>& groups() const { return groups_; }

  std::string canonicalize(std::string_view text) const;

  /// One group per line with members separated by '|'; '#' comments skipped.
  static SynonymGroups parse(std::string_view content, std::string_view origin = "<memory>");
  static SynonymGroups load(const std::filesystem::path& path);

 private:
  std::vector<std::vector<std::string>> groups_;
  SubstitutionLexicon rewrite_;
};

/// Reads a whole file; throws Error(Io) naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace termbt
