#include <json.hpp>

#include "termbt/pipeline.hpp"

namespace termbt::pipeline {

namespace {

using ojson = nlohmann::ordered_json;

ojson terms_json(const std::vector<terms::Term>& ts) {
  ojson a = ojson::array();
  for (const auto& t : ts) a.push_back(to_json(t));
  return a;
}

ojson report_json(const consistency::ConsistencyReport& r) {
  ojson records = ojson::array();
  for (const auto& rec : r.records) records.push_back(to_json(rec));
  return ojson{{"emr", r.emr},
               {"smr", r.smr},
               {"irs_mean", r.irs_mean},
               {"tdi", r.tdi},
               {"term_level_accuracy", r.term_level_accuracy},
               {"records", records},
               {"unmatched_eny", terms_json(r.unmatched_eny)}};
}

ojson path_json(const PathResult& p) {
  ojson hops = ojson::array();
  for (const Hop& h : p.path.hops) hops.push_back(ojson{{"from", h.from.code()}, {"to", h.to.code()}, {"provider", h.provider}});
  ojson docs = ojson::array();
  for (const Document& d : p.documents) docs.push_back(to_json(d));
  ojson error;
  if (p.failure) {
    error = ojson{{"code", p.failure->code},
                  {"message", p.failure->message},
                  {"provider", p.failure->provider},
                  {"hop", p.failure->hop ? ojson(*p.failure->hop) : ojson()},
                  {"attempts", p.failure->attempts}};
  }
  ojson inter = ojson::object();
  for (const auto& [lang, ts] : p.intermediate_terms) inter[lang.code()] = terms_json(ts);
  return ojson{{"label", p.path.label},
               {"topology", to_string(p.path.topology)},
               {"hops", hops},
               {"status", p.ok() ? "ok" : "failed"},
               {"error", error},
               {"documents", docs},
               {"text_scores", p.text_scores ? to_json(*p.text_scores) : ojson()},
               {"intermediate_terms", inter},
               {"eny_terms", terms_json(p.eny_terms)},
               {"consistency", p.report ? report_json(*p.report) : ojson()},
               {"timings_ms", p.timings_ms}};
}

}  // namespace

ojson to_json(const Document& d) {
  return ojson{{"id", d.id},
               {"lang", d.lang.code()},
               {"stage", to_string(d.stage)},
               {"provider", d.origin.provider},
               {"parent", d.origin.parent ? ojson(*d.origin.parent) : ojson()},
               {"text", d.text}};
}

ojson to_json(const terms::Term& t) {
  return ojson{{"surface", t.surface},
               {"normalized", t.normalized},
               {"lang", t.lang.code()},
               {"span", t.span ? ojson::array({t.span->start, t.span->end}) : ojson()},
               {"source", terms::to_string(t.source)}};
}

ojson to_json(const consistency::TermRecord& r) {
  ojson inter = ojson::array();
  for (const auto& it : r.intermediates) {
    inter.push_back(ojson{{"lang", it.lang.code()}, {"term", it.term ? to_json(*it.term) : ojson()}});
  }
  return ojson{{"en", to_json(r.en)},
               {"intermediates", inter},
               {"eny", r.eny ? to_json(*r.eny) : ojson()},
               {"exact_match", r.exact_match},
               {"semantic_match", r.semantic_match},
               {"semantic_score", r.semantic_score},
               {"irs", r.irs},
               {"notes", r.notes}};
}

ojson to_json(const textmetrics::TextScore& s) {
  return ojson{{"bleu",
                {{"score", s.bleu.score},
                 {"precisions", s.bleu.precisions},
                 {"brevity_penalty", s.bleu.brevity_penalty},
                 {"ref_len", s.bleu.ref_len},
                 {"cand_len", s.bleu.cand_len},
                 {"effective_n", s.bleu.effective_n}}},
               {"ter",
                {{"score", s.ter.score},
                 {"insertions", s.ter.insertions},
                 {"deletions", s.ter.deletions},
                 {"substitutions", s.ter.substitutions},
                 {"shifts", s.ter.shifts},
                 {"ref_len", s.ter.ref_len}}},
               {"meteor",
                {{"score", s.meteor.score},
                 {"precision", s.meteor.precision},
                 {"recall", s.meteor.recall},
                 {"f_mean", s.meteor.f_mean},
                 {"penalty", s.meteor.penalty},
                 {"matches", s.meteor.matches},
                 {"chunks", s.meteor.chunks}}},
               {"semantic_f1",
                {{"f1", s.semantic.f1}, {"precision", s.semantic.precision}, {"recall", s.semantic.recall}}},
               {"cosine", s.cosine}};
}

ojson to_json(const RunResult& r) {
  ojson paths = ojson::array();
  for (const auto& p : r.paths) paths.push_back(path_json(p));
  ojson cross = ojson::array();
  for (const auto& row : r.confidence) {
    ojson obs = ojson::array();
    for (const auto& o : row.observations) {
      obs.push_back(ojson{{"path", o.path_label},
                          {"exact", o.observation.exact},
                          {"semantic_score", o.observation.semantic_score}});
    }
    cross.push_back(ojson{{"en_term", row.en_term}, {"confidence", row.confidence}, {"observations", obs}});
  }
  ojson entries = ojson::array();
  for (const auto& e : r.recommendations.entries) entries.push_back(ojson::parse(recommend::entry_to_json(e)));
  ojson skipped = ojson::array();
  for (const auto& s : r.recommendations.skipped) {
    skipped.push_back(ojson{{"en_term", s.en_term}, {"lang", s.lang}, {"reason", s.reason}});
  }
  return ojson{{"schema_version", r.schema_version},
               {"run_id", r.run_id},
               {"label", r.label},
               {"seed", r.seed},
               {"timestamp", r.timestamp},
               {"source", to_json(r.source)},
               {"source_terms", terms_json(r.source_terms)},
               {"paths", paths},
               {"cross_path", cross},
               {"recommendations", entries},
               {"skipped", skipped},
               {"timings_ms", r.timings_ms}};
}

std::string serialize(const RunResult& result) { return to_json(result).dump(2) + "\n"; }

ojson strip_volatile(ojson j) {
  if (j.is_object()) {
    for (const char* key : {"run_id", "timestamp", "timings_ms"}) j.erase(key);
    for (auto& [k, v] : j.items()) v = strip_volatile(std::move(v));
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_volatile(std::move(v));
  }
  return j;
}

}  // namespace termbt::pipeline
