#include <fmt/format.h>

#include <algorithm>
#include <ctime>
#include <set>

#include "termbt/error.hpp"
#include "termbt/recommend.hpp"

namespace termbt::recommend {

void Thresholds::validate() const {
  if (!(irs_low > 0.0 && irs_low <= 1.0)) throw ConfigError(fmt::format("irs_low must be in (0, 1], got {}", irs_low));
  if (top_k < 1) throw ConfigError(fmt::format("top_k must be >= 1, got {}", top_k));
  if (!(tau_sem > 0.0 && tau_sem <= 1.0)) throw ConfigError(fmt::format("tau_sem must be in (0, 1], got {}", tau_sem));
  if (!(tau_align > 0.0 && tau_align <= 1.0)) {
    throw ConfigError(fmt::format("tau_align must be in (0, 1], got {}", tau_align));
  }
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Standardized: return "standardized";
    case Status::NeedsReview: return "needs_review";
    case Status::LowFidelity: return "low_fidelity";
  }
  return "needs_review";
}

Status status_from_string(std::string_view raw) {
  if (raw == "standardized") return Status::Standardized;
  if (raw == "needs_review") return Status::NeedsReview;
  if (raw == "low_fidelity") return Status::LowFidelity;
  throw Error(ErrorCode::Termbase, fmt::format("unknown status '{}'", raw));
}

std::string_view to_string(Verdict verdict) { return verdict == Verdict::Accepted ? "accepted" : "rejected"; }

Verdict verdict_from_string(std::string_view raw) {
  if (raw == "accepted" || raw == "accept") return Verdict::Accepted;
  if (raw == "rejected" || raw == "reject") return Verdict::Rejected;
  throw Error(ErrorCode::Config, fmt::format("unknown verdict '{}' (expected accept or reject)", raw));
}

Status decide_status(bool exact, bool semantic, double irs, const Thresholds& thresholds) {
  if (irs < thresholds.irs_low) return Status::LowFidelity;
  if (exact && semantic) return Status::Standardized;
  return Status::NeedsReview;
}

TermbaseEntry recommend(const std::string& en_term, const LangTag& lang, const std::vector<PathEvidence>& evidence,
                        const Thresholds& thresholds, const Provenance& provenance) {
  struct Group {
    std::string surface;
    std::vector<consistency::Observation> observations;
  };
  std::vector<std::pair<std::string, Group>> groups;  // keyed by normalized L2 term, first-seen order
  std::vector<consistency::Observation> all;
  bool exact_all = !evidence.empty();
  bool semantic_all = !evidence.empty();
  double irs_sum = 0.0;
  for (const PathEvidence& ev : evidence) {
    const consistency::Observation obs{ev.record.exact_match, ev.record.semantic_score};
    all.push_back(obs);
    exact_all = exact_all && ev.record.exact_match;
    semantic_all = semantic_all && ev.record.semantic_match;
    irs_sum += ev.record.irs;
    if (const terms::Term* l2 = ev.record.intermediate(lang)) {
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == l2->normalized; });
      if (it == groups.end()) {
        groups.emplace_back(l2->normalized, Group{l2->surface, {}});
        it = std::prev(groups.end());
      }
      it->second.observations.push_back(obs);
    }
  }
  if (groups.empty()) {
    throw Error(ErrorCode::NotFound,
                fmt::format("no '{}' rendering of '{}' on any path", lang.code(), en_term));
  }

  std::vector<Candidate> candidates;
  for (const auto& [_, g] : groups) candidates.push_back(Candidate{g.surface, consistency::confidence_score(g.observations)});
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.l2_term < b.l2_term;
  });
  if (candidates.size() > static_cast<std::size_t>(thresholds.top_k)) candidates.resize(static_cast<std::size_t>(thresholds.top_k));

  const double irs_mean = irs_sum / static_cast<double>(evidence.size());
  TermbaseEntry entry{en_term, lang, candidates.front().l2_term,
                      decide_status(exact_all, semantic_all, irs_mean, thresholds), candidates,
                      consistency::confidence_score(all), provenance, {}};
  return entry;
}

Recommendations recommend_all(const std::vector<PathRecords>& paths, const Thresholds& thresholds,
                              const std::string& run_id, const std::string& timestamp) {
  std::vector<std::pair<std::string, LangTag>> keys;
  std::set<std::pair<std::string, std::string>> seen;
  for (const PathRecords& p : paths) {
    for (const auto& rec : p.records) {
      for (const LangTag& lang : p.intermediate_langs) {
        if (seen.emplace(rec.en.normalized, lang.code()).second) keys.emplace_back(rec.en.normalized, lang);
      }
    }
  }
  Recommendations out;
  for (const auto& [term, lang] : keys) {
    std::vector<PathEvidence> evidence;
    Provenance provenance{run_id, {}, timestamp};
    for (const PathRecords& p : paths) {
      if (std::find(p.intermediate_langs.begin(), p.intermediate_langs.end(), lang) == p.intermediate_langs.end()) {
        continue;
      }
      for (const auto& rec : p.records) {
        if (rec.en.normalized != term) continue;
        evidence.push_back(PathEvidence{p.path_label, rec});
        provenance.path_labels.push_back(p.path_label);
        break;
      }
    }
    try {
      out.entries.push_back(recommend(term, lang, evidence, thresholds, provenance));
    } catch (const Error& e) {
      out.skipped.push_back(Skipped{term, lang.code(), e.what()});
    }
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const TermbaseEntry& a, const TermbaseEntry& b) {
    return std::tie(a.en_term, a.lang) < std::tie(b.en_term, b.lang);
  });
  return out;
}

std::string now_utc_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace termbt::recommend
