#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "termbt/consistency.hpp"
#include "termbt/core.hpp"

namespace termbt::recommend {

struct Thresholds {
  double irs_low = 0.5;
  int top_k = 3;
  double tau_sem = 0.75;
  double tau_align = 0.6;

  /// Throws ConfigError when a value is out of range.
  void validate() const;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

enum class Status { Standardized, NeedsReview, LowFidelity };

std::string_view to_string(Status status);
Status status_from_string(std::string_view raw);

/// Precedence: irs < irs_low gives LowFidelity; otherwise exact and semantic
/// gives Standardized; everything else needs review.
Status decide_status(bool exact, bool semantic, double irs, const Thresholds& thresholds);

struct Candidate {
  std::string l2_term;
  double confidence = 0.0;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Provenance {
  std::string run_id;
  std::vector<std::string> path_labels;
  std::string timestamp;  // UTC, ISO-8601
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

enum class Verdict { Accepted, Rejected };

std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view raw);

struct Review {
  Verdict verdict = Verdict::Accepted;
  std::optional<std::string> replacement;
  std::string timestamp;
  friend bool operator==(const Review&, const Review&) = default;
};

struct TermbaseEntry {
  std::string en_term;
  LangTag lang;
  std::string l2_term;
  Status status = Status::NeedsReview;
  std::vector<Candidate> candidates;
  double confidence = 0.0;
  Provenance provenance;
  std::vector<Review> reviews;  // oldest first; never rewritten

  friend bool operator==(const TermbaseEntry&, const TermbaseEntry&) = default;
};

/// One path's record for the term being recommended.
struct PathEvidence {
  std::string path_label;
  consistency::TermRecord record;
};

/// Recommendation for one (EN term, intermediate language). Candidates are
/// the intermediate renderings seen across paths, ranked by confidence.
/// Throws Error(NotFound) when no path produced an intermediate term.
TermbaseEntry recommend(const std::string& en_term, const LangTag& lang, const std::vector<PathEvidence>& evidence,
                        const Thresholds& thresholds, const Provenance& provenance);

struct PathRecords {
  std::string path_label;
  std::vector<LangTag> intermediate_langs;
  std::vector<consistency::TermRecord> records;
};

struct Skipped {
  std::string en_term;
  std::string lang;
  std::string reason;
  friend bool operator==(const Skipped&, const Skipped&) = default;
};

struct Recommendations {
  std::vector<TermbaseEntry> entries;  // sorted by (en_term, lang)
  std::vector<Skipped> skipped;
};

Recommendations recommend_all(const std::vector<PathRecords>& paths, const Thresholds& thresholds,
                              const std::string& run_id, const std::string& timestamp);

/// Current time as "YYYY-MM-DDTHH:MM:SSZ".
std::string now_utc_iso8601();

std::string entry_to_json(const TermbaseEntry& entry);
/// Throws Error(Termbase) on malformed input.
TermbaseEntry entry_from_json(std::string_view line);

/// Line-delimited JSON store: a header line, then one snapshot per write in
/// write order. The live view keeps the newest snapshot per (en_term, lang).
class Termbase {
 public:
  using Key = std::pair<std::string, std::string>;  // (en_term, lang code)
  using FaultHook = std::function<void(std::string_view stage)>;

  explicit Termbase(std::filesystem::path path);

  /// Reads the store; a missing file is an empty store. Errors name the line.
  static Termbase load(const std::filesystem::path& path);

  const std::filesystem::path& path() const { return path_; }
  const std::map<Key, TermbaseEntry>& live() const { return live_; }
  const std::vector<TermbaseEntry>& history() const { return history_; }
  std::uint64_t revision() const { return history_.size(); }
  const TermbaseEntry* find(const std::string& en_term, const LangTag& lang) const;

  /// Writes under the lock file, reloading first so concurrent writers are
  /// serialized. Earlier reviews of the key are carried into the new entry.
  /// Returns the new revision number.
  std::uint64_t upsert(TermbaseEntry entry);
  std::uint64_t upsert_all(std::vector<TermbaseEntry> entries);

  /// Appends a verdict and updates status. Throws Error(NotFound) for an unknown key.
  TermbaseEntry review(const std::string& en_term, const LangTag& lang, Verdict verdict,
                       std::optional<std::string> replacement, const std::string& timestamp);

  std::string export_csv() const;
  std::string export_jsonl() const;
  static std::vector<TermbaseEntry> import_jsonl(std::string_view content);

  void set_lock_timeout(std::chrono::milliseconds timeout) { lock_timeout_ = timeout; }
  /// Called at "temp_written" (before rename) and "partial" (half the
  /// temporary file written); throwing from it simulates a crash.
  void set_fault_hook(FaultHook hook) { fault_hook_ = std::move(hook); }

 private:
  void apply(TermbaseEntry entry);
  void reload();
  void write_all() const;

  std::filesystem::path path_;
  std::map<Key, TermbaseEntry> live_;
  std::vector<TermbaseEntry> history_;
  std::chrono::milliseconds lock_timeout_{5000};
  FaultHook fault_hook_;
};

}  // namespace termbt::recommend
