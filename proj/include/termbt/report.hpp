#pragma once

// Report tables built from a RunResult, rendered as Markdown and CSV.
// Building copies values out of the run; rendering only formats them.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "termbt/pipeline.hpp"

namespace termbt::report {

struct MetricRow {
  std::string metric;
  bool percent = false;
  std::vector<std::optional<double>> values;  // one per completed path
};

struct TermRow {
  std::string path_label;
  std::string en;
  std::vector<std::string> l2;  // one per tracked intermediate; "(dropped)" when the stage lost it
  std::string eny;              // empty when unpaired
  std::string match;            // exact, semantic, mismatch or unpaired
  double irs = 0.0;
  std::string notes;
};

struct RecommendationRow {
  std::string en_term;
  std::string lang;
  std::string l2_term;
  std::string status;
  double confidence = 0.0;
  std::vector<std::pair<std::string, double>> candidates;
};

struct ConfidenceRow {
  std::string en_term;
  double confidence = 0.0;
  std::vector<std::string> paths;
};

struct FailureRow {
  std::string path_label;
  std::string code;
  std::string message;
};

/// Rubric for manual scoring, 1 to 5 per (dimension, path). Never computed.
struct HumanEval {
  std::vector<std::string> dimensions;
  std::vector<std::string> path_labels;
  std::map<std::pair<std::string, std::string>, std::optional<int>> scores;  // (dimension, path)

  static const std::vector<std::string>& default_dimensions();
  static HumanEval empty_for(const std::vector<std::string>& path_labels);
  /// Throws ConfigError unless every score is null or an integer 1..5 and
  /// every key names a known dimension and path.
  void set(const std::string& dimension, const std::string& path, std::optional<int> score);
};

struct ReportBundle {
  const pipeline::RunResult* run = nullptr;
  std::string label;
  std::vector<std::string> path_labels;  // completed paths, config order
  std::vector<MetricRow> similarity_table;
  std::vector<MetricRow> consistency_table;
  std::vector<TermRow> term_table;
  std::vector<RecommendationRow> recommendations;
  std::vector<ConfidenceRow> confidence;
  std::vector<FailureRow> failures;
  HumanEval human_eval;
};

ReportBundle build_bundle(const pipeline::RunResult& run);

std::string render_markdown(const ReportBundle& bundle);
/// Term table as CSV.
std::string render_csv(const ReportBundle& bundle);

std::string human_eval_to_json(const HumanEval& rubric);
/// Fills `into` from a rubric file written by human_eval_to_json.
void read_human_eval(std::string_view json_text, HumanEval& into);

std::string csv_field(std::string_view s);

}  // namespace termbt::report
