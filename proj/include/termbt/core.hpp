#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace termbt {

/// Canonical lowercase language tag: letters with an optional "-region"
/// suffix ("en", "zh-cn", "pt-br"). Parsing is case-insensitive.
class LangTag {
 public:
  static LangTag parse(std::string_view raw);
  static bool valid(std::string_view raw);

  const std::string& code() const noexcept { return code_; }

  friend bool operator==(const LangTag&, const LangTag&) = default;
  friend auto operator<=>(const LangTag&, const LangTag&) = default;

 private:
  explicit LangTag(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

enum class Stage { Source, Intermediate, BackTranslated };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view raw);

inline constexpr std::string_view kInputOrigin = "input";

struct Origin {
  std::string provider;               // provider id, or "input" for source documents
  std::optional<std::string> parent;  // id of the document this one was translated from

  friend bool operator==(const Origin&, const Origin&) = default;
};

/// A text in one language at one pipeline stage. Immutable once built.
struct Document {
  std::string id;
  std::string text;
  LangTag lang;
  Stage stage;
  Origin origin;

  static Document source(std::string text, LangTag lang);
  /// Child document produced by `provider` from this one.
  Document derive(std::string text, LangTag lang, Stage stage, std::string provider) const;

  friend bool operator==(const Document&, const Document&) = default;
};

enum class Topology { Parallel, Serial };

std::string_view to_string(Topology topology);
Topology topology_from_string(std::string_view raw);

struct Hop {
  LangTag from;
  LangTag to;
  std::string provider;

  friend bool operator==(const Hop&, const Hop&) = default;
};

struct BtPath {
  Topology topology = Topology::Parallel;
  std::vector<Hop> hops;
  std::string label;

  const LangTag& source_lang() const { return hops.front().from; }
  /// Languages visited between the source and the final back-translation.
  std::vector<LangTag> intermediate_langs() const;

  friend bool operator==(const BtPath&, const BtPath&) = default;
};

/// Build a path from a language route ("en","zh-cn","en") with one provider per hop.
/// Topology is Parallel for two hops and Serial otherwise.
BtPath make_path(std::string label, const std::vector<LangTag>& route,
                 const std::vector<std::string>& providers);

/// Throws PathError unless the path is non-empty, chained hop to hop,
/// closes back on its source language, and has a hop count that fits its
/// topology (Parallel: exactly 2, Serial: at least 2).
void validate_path(const BtPath& path);

}  // namespace termbt
