#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "termbt/consistency.hpp"
#include "termbt/error.hpp"

namespace termbt::consistency {

ConsistencyReport compute_report(std::string path_label, std::vector<TermRecord> records,
                                 std::vector<Term> unmatched_eny,
                                 std::optional<textmetrics::TextScore> text_scores,
                                 const std::map<std::string, double>& weights) {
  if (records.empty()) {
    throw Error(ErrorCode::Precondition, fmt::format("path '{}': no term records to report on", path_label));
  }
  ConsistencyReport r;
  r.path_label = std::move(path_label);
  std::size_t exact = 0;
  std::size_t semantic = 0;
  double weighted = 0.0;
  double total_weight = 0.0;
  std::vector<std::string> en;
  std::vector<std::string> eny;
  for (const TermRecord& rec : records) {
    exact += rec.exact_match ? 1 : 0;
    semantic += rec.semantic_match ? 1 : 0;
    auto it = weights.find(rec.en.normalized);
    const double w = it == weights.end() ? 1.0 : it->second;
    weighted += w * rec.irs;
    total_weight += w;
    en.push_back(rec.en.normalized);
    if (rec.eny) eny.push_back(rec.eny->normalized);
  }
  for (const Term& t : unmatched_eny) eny.push_back(t.normalized);
  const double n = static_cast<double>(records.size());
  r.emr = 100.0 * static_cast<double>(exact) / n;
  r.smr = 100.0 * static_cast<double>(semantic) / n;
  r.irs_mean = total_weight > 0.0 ? weighted / total_weight : 0.0;
  r.tdi = compute_tdi(en, eny);
  r.term_level_accuracy = r.smr;
  r.records = std::move(records);
  r.unmatched_eny = std::move(unmatched_eny);
  r.text_scores = std::move(text_scores);
  return r;
}

double compute_tdi(const std::vector<std::string>& en_terms, const std::vector<std::string>& eny_terms) {
  if (en_terms.empty()) throw Error(ErrorCode::Precondition, "TDI needs at least one EN term");
  if (eny_terms.empty()) return 1.0;
  std::map<std::string_view, std::pair<double, double>> freq;
  for (const auto& t : en_terms) freq[t].first += 1.0;
  for (const auto& t : eny_terms) freq[t].second += 1.0;
  const double ne = static_cast<double>(en_terms.size());
  const double ny = static_cast<double>(eny_terms.size());
  double sum = 0.0;
  for (const auto& [_, counts] : freq) sum += std::fabs(counts.first / ne - counts.second / ny);
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

double compute_tdi(const std::vector<Term>& en_terms, const std::vector<Term>& eny_terms) {
  std::vector<std::string> en;
  std::vector<std::string> eny;
  for (const Term& t : en_terms) en.push_back(t.normalized);
  for (const Term& t : eny_terms) eny.push_back(t.normalized);
  return compute_tdi(en, eny);
}

double confidence_score(const std::vector<Observation>& observations) {
  if (observations.empty()) throw Error(ErrorCode::Precondition, "confidence needs at least one observation");
  double exact = 0.0;
  double score = 0.0;
  for (const Observation& o : observations) {
    exact += o.exact ? 1.0 : 0.0;
    score += o.semantic_score;
  }
  const double n = static_cast<double>(observations.size());
  return 0.5 * (exact / n) + 0.5 * std::clamp(score / n, 0.0, 1.0);
}

}  // namespace termbt::consistency
