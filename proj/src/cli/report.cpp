#include "termbt/report.hpp"

#include <fmt/format.h>

#include <json.hpp>

#include "termbt/error.hpp"

namespace termbt::report {

namespace {

using ojson = nlohmann::ordered_json;

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out;
}

std::string format_value(const std::optional<double>& v, bool percent) {
  if (!v) return "n/a";
  return percent ? fmt::format("{:.2f}%", *v) : fmt::format("{:.4f}", *v);
}

void table_header(std::string& out, const std::vector<std::string>& columns) {
  out += "|";
  for (const auto& c : columns) out += " " + md_cell(c) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
  out += "\n";
}

void table_row(std::string& out, const std::vector<std::string>& cells) {
  out += "|";
  for (const auto& c : cells) out += " " + md_cell(c) + " |";
  out += "\n";
}

void metric_table(std::string& out, std::string_view first, const std::vector<std::string>& paths,
                  const std::vector<MetricRow>& rows) {
  std::vector<std::string> cols = {std::string(first)};
  cols.insert(cols.end(), paths.begin(), paths.end());
  table_header(out, cols);
  for (const MetricRow& r : rows) {
    std::vector<std::string> cells = {r.metric};
    for (const auto& v : r.values) cells.push_back(format_value(v, r.percent));
    table_row(out, cells);
  }
}

std::string match_class(const consistency::TermRecord& r) {
  if (!r.eny) return "unpaired";
  if (r.exact_match) return "exact";
  if (r.semantic_match) return "semantic";
  return "mismatch";
}

const std::map<std::string, std::string>& dimension_titles() {
  static const std::map<std::string, std::string> titles = {
      {"terminology_consistency", "Terminology consistency"},
      {"information_completeness", "Information completeness"},
      {"fluency", "Fluency"},
      {"style_matching", "Style matching"}};
  return titles;
}

}  // namespace

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const std::vector<std::string>& HumanEval::default_dimensions() {
  static const std::vector<std::string> dims = {"terminology_consistency", "information_completeness", "fluency",
                                                "style_matching"};
  return dims;
}

HumanEval HumanEval::empty_for(const std::vector<std::string>& path_labels) {
  HumanEval h{default_dimensions(), path_labels, {}};
  for (const auto& d : h.dimensions) {
    for (const auto& p : h.path_labels) h.scores[{d, p}] = std::nullopt;
  }
  return h;
}

void HumanEval::set(const std::string& dimension, const std::string& path, std::optional<int> score) {
  auto it = scores.find({dimension, path});
  if (it == scores.end()) throw ConfigError(fmt::format("human evaluation has no slot ({}, {})", dimension, path));
  if (score && (*score < 1 || *score > 5)) {
    throw ConfigError(fmt::format("human evaluation score for ({}, {}) must be 1..5, got {}", dimension, path, *score));
  }
  it->second = score;
}

ReportBundle build_bundle(const pipeline::RunResult& run) {
  ReportBundle b;
  b.run = &run;
  b.label = run.label;
  std::vector<const pipeline::PathResult*> done;
  for (const auto& p : run.paths) {
    if (p.ok()) {
      done.push_back(&p);
      b.path_labels.push_back(p.path.label);
    } else {
      b.failures.push_back({p.path.label, p.failure->code, p.failure->message});
    }
  }

  auto metric = [&](std::string name, bool percent, auto get) {
    MetricRow row{std::move(name), percent, {}};
    for (const auto* p : done) row.values.push_back(get(*p));
    return row;
  };
  using P = pipeline::PathResult;
  b.similarity_table = {
      metric("BLEU", false, [](const P& p) { return std::optional<double>(p.text_scores->bleu.score); }),
      metric("TER", false, [](const P& p) { return std::optional<double>(p.text_scores->ter.score); }),
      metric("METEOR", false, [](const P& p) { return std::optional<double>(p.text_scores->meteor.score); }),
      metric("Semantic F1", false, [](const P& p) { return std::optional<double>(p.text_scores->semantic.f1); }),
      metric("Cosine", false, [](const P& p) { return std::optional<double>(p.text_scores->cosine); }),
  };
  b.consistency_table = {
      metric("EMR", true, [](const P& p) { return std::optional<double>(p.report->emr); }),
      metric("SMR", true, [](const P& p) { return std::optional<double>(p.report->smr); }),
      metric("IRS", false, [](const P& p) { return std::optional<double>(p.report->irs_mean); }),
      metric("TDI", false, [](const P& p) { return std::optional<double>(p.report->tdi); }),
      metric("Term-level accuracy", true,
             [](const P& p) { return std::optional<double>(p.report->term_level_accuracy); }),
  };

  for (const auto* p : done) {
    for (const auto& r : p->report->records) {
      TermRow row{p->path.label, r.en.surface, {}, r.eny ? r.eny->surface : "", match_class(r), r.irs, r.notes};
      for (const auto& it : r.intermediates) row.l2.push_back(it.term ? it.term->surface : "(dropped)");
      b.term_table.push_back(std::move(row));
    }
  }

  for (const auto& e : run.recommendations.entries) {
    RecommendationRow row{e.en_term, e.lang.code(), e.l2_term, std::string(recommend::to_string(e.status)),
                          e.confidence, {}};
    for (const auto& c : e.candidates) row.candidates.emplace_back(c.l2_term, c.confidence);
    b.recommendations.push_back(std::move(row));
  }
  for (const auto& c : run.confidence) {
    ConfidenceRow row{c.en_term, c.confidence, {}};
    for (const auto& o : c.observations) row.paths.push_back(o.path_label);
    b.confidence.push_back(std::move(row));
  }
  b.human_eval = HumanEval::empty_for(b.path_labels);
  return b;
}

std::string render_markdown(const ReportBundle& b) {
  std::string out = fmt::format("# Back-translation report: {}\n\n", md_cell(b.label));

  out += "## Text similarity\n\n";
  metric_table(out, "Metric", b.path_labels, b.similarity_table);

  out += "\n## Terminology consistency\n\n";
  metric_table(out, "Consistency metric", b.path_labels, b.consistency_table);

  for (const std::string& label : b.path_labels) {
    std::size_t n_l2 = 0;
    for (const TermRow& r : b.term_table) {
      if (r.path_label == label) n_l2 = std::max(n_l2, r.l2.size());
    }
    out += fmt::format("\n## Terms: {}\n\n", md_cell(label));
    std::vector<std::string> cols = {"EN"};
    for (std::size_t i = 0; i < n_l2; ++i) cols.push_back(n_l2 == 1 ? "L2" : fmt::format("L{}", i + 2));
    for (const char* c : {"ENy", "Match", "IRS", "Notes"}) cols.emplace_back(c);
    table_header(out, cols);
    for (const TermRow& r : b.term_table) {
      if (r.path_label != label) continue;
      std::vector<std::string> cells = {r.en};
      for (std::size_t i = 0; i < n_l2; ++i) cells.push_back(i < r.l2.size() ? r.l2[i] : "");
      cells.push_back(r.eny);
      cells.push_back(r.match);
      cells.push_back(fmt::format("{:.4f}", r.irs));
      cells.push_back(r.notes);
      table_row(out, cells);
    }
  }

  out += "\n## Recommendations\n\n";
  table_header(out, {"EN term", "Lang", "L2 term", "Status", "Confidence", "Candidates"});
  for (const auto& r : b.recommendations) {
    std::vector<std::string> cands;
    for (const auto& [term, conf] : r.candidates) cands.push_back(fmt::format("{} ({:.4f})", term, conf));
    table_row(out, {r.en_term, r.lang, r.l2_term, r.status, fmt::format("{:.4f}", r.confidence),
                    fmt::format("{}", fmt::join(cands, "; "))});
  }

  out += "\n## Cross-path confidence\n\n";
  table_header(out, {"EN term", "Confidence", "Paths"});
  for (const auto& r : b.confidence) {
    table_row(out, {r.en_term, fmt::format("{:.4f}", r.confidence), fmt::format("{}", fmt::join(r.paths, ", "))});
  }

  if (!b.failures.empty()) {
    out += "\n## Failed paths\n\n";
    table_header(out, {"Path", "Code", "Message"});
    for (const auto& f : b.failures) table_row(out, {f.path_label, f.code, f.message});
  }

  out += "\n## Human evaluation\n\nScores 1 to 5, entered by a reviewer.\n\n";
  std::vector<std::string> cols = {"Dimension"};
  cols.insert(cols.end(), b.human_eval.path_labels.begin(), b.human_eval.path_labels.end());
  table_header(out, cols);
  for (const auto& d : b.human_eval.dimensions) {
    auto title = dimension_titles().find(d);
    std::vector<std::string> cells = {title == dimension_titles().end() ? d : title->second};
    for (const auto& p : b.human_eval.path_labels) {
      auto s = b.human_eval.scores.find({d, p});
      cells.push_back(s != b.human_eval.scores.end() && s->second ? std::to_string(*s->second) : "");
    }
    table_row(out, cells);
  }
  return out;
}

std::string render_csv(const ReportBundle& b) {
  std::string out = "path,en,l2,eny,match,irs,notes\n";
  for (const TermRow& r : b.term_table) {
    out += fmt::format("{},{},{},{},{},{:.4f},{}\n", csv_field(r.path_label), csv_field(r.en),
                       csv_field(fmt::format("{}", fmt::join(r.l2, " > "))), csv_field(r.eny), r.match, r.irs,
                       csv_field(r.notes));
  }
  return out;
}

std::string human_eval_to_json(const HumanEval& h) {
  ojson paths = ojson::object();
  for (const auto& p : h.path_labels) {
    ojson slots = ojson::object();
    for (const auto& d : h.dimensions) {
      auto s = h.scores.find({d, p});
      slots[d] = s != h.scores.end() && s->second ? ojson(*s->second) : ojson();
    }
    paths[p] = slots;
  }
  return ojson{{"schema_version", 1}, {"scale", {1, 5}}, {"dimensions", h.dimensions}, {"paths", paths}}.dump(2) +
         "\n";
}

void read_human_eval(std::string_view json_text, HumanEval& into) {
  ojson j = ojson::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("paths") || !j["paths"].is_object()) {
    throw ConfigError("human evaluation file must be a JSON object with a \"paths\" object");
  }
  for (const auto& [path, slots] : j["paths"].items()) {
    if (!slots.is_object()) throw ConfigError(fmt::format("human evaluation for '{}' must be an object", path));
    for (const auto& [dim, v] : slots.items()) {
      if (v.is_null()) {
        into.set(dim, path, std::nullopt);
      } else if (v.is_number_integer()) {
        into.set(dim, path, v.get<int>());
      } else {
        throw ConfigError(fmt::format("human evaluation score for ({}, {}) must be an integer or null", dim, path));
      }
    }
  }
}

}  // namespace termbt::report
