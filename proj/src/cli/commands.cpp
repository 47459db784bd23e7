#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "termbt/cli.hpp"
#include "termbt/config.hpp"
#include "termbt/pipeline.hpp"
#include "termbt/recommend.hpp"
#include "termbt/report.hpp"

namespace termbt::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::Io, fmt::format("error writing '{}'", path.string()));
}

std::string read_input(const fs::path& path) {
  std::string text = read_text_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::Precondition, fmt::format("'{}' is empty", path.string()));
  }
  return text;
}

void check_format(const std::string& format, std::initializer_list<std::string_view> allowed) {
  if (std::find(allowed.begin(), allowed.end(), format) == allowed.end()) {
    throw ConfigError(fmt::format("unsupported --format '{}' for this command", format));
  }
}

struct Common {
  std::string config;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  bool offline = false;
};

RunConfig load(const Common& c) {
  RunConfig config = load_config(c.config);
  if (c.seed) apply_seed(config, *c.seed);
  return config;
}

pipeline::RunOptions run_options(const Common& c) {
  pipeline::RunOptions o;
  o.offline = c.offline;
  return o;
}

fs::path termbase_path(const std::string& flag, const std::string& config_path) {
  if (!flag.empty()) return flag;
  if (!config_path.empty()) {
    RunConfig config = load_config(config_path);
    if (config.termbase) return *config.termbase;
  }
  throw ConfigError("no termbase: pass --termbase or set [termbase] path in the config");
}

std::string terms_csv(const std::vector<terms::Term>& ts) {
  std::string out = "surface,normalized,lang,start,end,source\n";
  for (const auto& t : ts) {
    out += fmt::format("{},{},{},{},{},{}\n", report::csv_field(t.surface), report::csv_field(t.normalized),
                       t.lang.code(), t.span ? std::to_string(t.span->start) : "",
                       t.span ? std::to_string(t.span->end) : "", terms::to_string(t.source));
  }
  return out;
}

std::string recommendations_csv(const recommend::Recommendations& r) {
  std::string out = "en_term,lang,l2_term,status,confidence\n";
  for (const auto& e : r.entries) {
    out += fmt::format("{},{},{},{},{:.4f}\n", report::csv_field(e.en_term), e.lang.code(),
                       report::csv_field(e.l2_term), recommend::to_string(e.status), e.confidence);
  }
  return out;
}

ojson recommendations_json(const recommend::Recommendations& r) {
  ojson entries = ojson::array();
  for (const auto& e : r.entries) entries.push_back(ojson::parse(recommend::entry_to_json(e)));
  ojson skipped = ojson::array();
  for (const auto& s : r.skipped) skipped.push_back(ojson{{"en_term", s.en_term}, {"lang", s.lang}, {"reason", s.reason}});
  return ojson{{"schema_version", 1}, {"recommendations", entries}, {"skipped", skipped}};
}

void upsert_recommendations(const fs::path& path, const recommend::Recommendations& r, std::ostream& out) {
  if (r.entries.empty()) return;
  recommend::Termbase tb(path);
  const std::uint64_t rev = tb.upsert_all(r.entries);
  fmt::print(out, "termbase {}: {} entries written, revision {}\n", path.string(), r.entries.size(), rev);
}

int cmd_run(const Common& c, const std::string& out_dir, const std::string& human_eval, std::ostream& out) {
  RunConfig config = load(c);
  const pipeline::RunResult result = pipeline::run(config, run_options(c));
  report::ReportBundle bundle = report::build_bundle(result);
  if (!human_eval.empty()) report::read_human_eval(read_text_file(human_eval), bundle.human_eval);

  const fs::path dir = out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  write_file(dir / "result.json", pipeline::serialize(result));
  write_file(dir / "report.md", report::render_markdown(bundle));
  write_file(dir / "report.csv", report::render_csv(bundle));
  write_file(dir / "human_eval.json", report::human_eval_to_json(bundle.human_eval));

  for (const auto& p : result.paths) {
    if (p.ok()) {
      fmt::print(out, "path {}: ok EMR {:.2f}% SMR {:.2f}% IRS {:.4f} TDI {:.4f}\n", p.path.label, p.report->emr,
                 p.report->smr, p.report->irs_mean, p.report->tdi);
    } else {
      fmt::print(out, "path {}: failed {} {}\n", p.path.label, p.failure->code, p.failure->message);
    }
  }
  if (config.termbase) upsert_recommendations(*config.termbase, result.recommendations, out);
  fmt::print(out, "wrote {}\n", dir.string());
  return result.exit_code();
}

int cmd_score(const Common& c, const std::string& candidate, const std::string& reference, const std::string& lang,
              std::ostream& out) {
  check_format(c.format, {"json", "md"});
  textmetrics::MetricParams params;
  std::shared_ptr<EmbeddingProvider> embedder = std::make_shared<HashedNgramEmbedder>();
  if (!c.config.empty()) {
    RunConfig config = load(c);
    params = config.metric_params;
    embedder = pipeline::build_bindings(config, run_options(c)).embedder;
  }
  const LangTag tag = LangTag::parse(lang);
  const Document ref = Document::source(read_input(reference), tag);
  const Document cand = ref.derive(read_input(candidate), tag, Stage::BackTranslated, "input");
  const textmetrics::TextScore s = textmetrics::score_texts(cand, ref, params, *embedder);
  if (c.format == "json") {
    out << pipeline::to_json(s).dump(2) << "\n";
  } else {
    fmt::print(out, "| Metric | Score |\n|---|---|\n| BLEU | {:.4f} |\n| TER | {:.4f} |\n| METEOR | {:.4f} |\n"
                    "| Semantic F1 | {:.4f} |\n| Cosine | {:.4f} |\n",
               s.bleu.score, s.ter.score, s.meteor.score, s.semantic.f1, s.cosine);
  }
  return 0;
}

int cmd_extract(const Common& c, const std::string& input, const std::string& lang, std::ostream& out) {
  check_format(c.format, {"json", "csv"});
  RunConfig config = load(c);
  pipeline::Bindings b = pipeline::build_bindings(config, run_options(c));
  Document doc = config.source;
  if (!input.empty()) doc = Document::source(read_input(input), lang.empty() ? config.source.lang : LangTag::parse(lang));
  const terms::TermLexicon lexicon = doc.lang == config.source.lang
                                         ? b.lexicon
                                         : pipeline::intermediate_lexicon(b.lexicon, doc.lang, config.source.lang);
  const auto found = terms::extract(doc, config.extraction.strategy, lexicon, b.extractor.get());
  if (c.format == "csv") {
    out << terms_csv(found);
  } else {
    ojson a = ojson::array();
    for (const auto& t : found) a.push_back(pipeline::to_json(t));
    out << a.dump(2) << "\n";
  }
  return 0;
}

std::vector<terms::Term> term_list(const std::string& path, const LangTag& lang) {
  const std::string text = read_input(path);
  std::vector<std::string> surfaces;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) surfaces.push_back(line);
    pos = nl + 1;
  }
  return terms::terms_from_surfaces(Document::source(text, lang), surfaces, terms::TermSource::Dictionary);
}

int cmd_align(const Common& c, const std::string& en_file, const std::string& eny_file, std::ostream& out) {
  check_format(c.format, {"json", "csv", "md"});
  std::shared_ptr<EmbeddingProvider> embedder = std::make_shared<HashedNgramEmbedder>();
  recommend::Thresholds th;
  terms::TermLexicon lexicon;
  if (!c.config.empty()) {
    RunConfig config = load(c);
    th = config.thresholds;
    pipeline::Bindings b = pipeline::build_bindings(config, run_options(c));
    embedder = b.embedder;
    lexicon = b.lexicon;
  }
  const LangTag en = LangTag::parse("en");
  auto al = consistency::align_terms(term_list(en_file, en), term_list(eny_file, en), {}, *embedder,
                                     {th.tau_align, th.tau_sem, &lexicon});
  if (c.format == "json") {
    ojson records = ojson::array();
    for (const auto& r : al.records) records.push_back(pipeline::to_json(r));
    ojson unmatched = ojson::array();
    for (const auto& t : al.unmatched_eny) unmatched.push_back(pipeline::to_json(t));
    out << ojson{{"records", records}, {"unmatched_eny", unmatched}}.dump(2) << "\n";
    return 0;
  }
  if (c.format == "md") out << "| EN | ENy | Match | Score | IRS |\n|---|---|---|---|---|\n";
  else out << "en,eny,match,score,irs\n";
  for (const auto& r : al.records) {
    const std::string eny = r.eny ? r.eny->surface : "";
    const char* match = !r.eny ? "unpaired" : r.exact_match ? "exact" : r.semantic_match ? "semantic" : "mismatch";
    if (c.format == "md") {
      fmt::print(out, "| {} | {} | {} | {:.4f} | {:.4f} |\n", r.en.surface, eny, match, r.semantic_score, r.irs);
    } else {
      fmt::print(out, "{},{},{},{:.4f},{:.4f}\n", report::csv_field(r.en.surface), report::csv_field(eny), match,
                 r.semantic_score, r.irs);
    }
  }
  return 0;
}

int cmd_recommend(const Common& c, const std::string& termbase, std::ostream& out, std::ostream& err) {
  check_format(c.format, {"json", "csv", "md"});
  RunConfig config = load(c);
  const pipeline::RunResult result = pipeline::run(config, run_options(c));
  if (c.format == "json") {
    out << recommendations_json(result.recommendations).dump(2) << "\n";
  } else if (c.format == "csv") {
    out << recommendations_csv(result.recommendations);
  } else {
    out << "| EN term | Lang | L2 term | Status | Confidence |\n|---|---|---|---|---|\n";
    for (const auto& e : result.recommendations.entries) {
      fmt::print(out, "| {} | {} | {} | {} | {:.4f} |\n", e.en_term, e.lang.code(), e.l2_term,
                 recommend::to_string(e.status), e.confidence);
    }
  }
  std::optional<fs::path> tb = termbase.empty() ? config.termbase : std::optional<fs::path>(termbase);
  if (tb) upsert_recommendations(*tb, result.recommendations, err);
  return result.exit_code();
}

recommend::Verdict parse_verdict(const std::string& raw) {
  if (raw == "accept" || raw == "accepted") return recommend::Verdict::Accepted;
  if (raw == "reject" || raw == "rejected") return recommend::Verdict::Rejected;
  throw ConfigError(fmt::format("unknown verdict '{}' (expected accept or reject)", raw));
}

int cmd_review(const Common& c, const std::string& termbase, const std::string& term, const std::string& lang,
               const std::string& verdict, const std::optional<std::string>& replacement, std::ostream& out) {
  recommend::Termbase tb(termbase_path(termbase, c.config));
  const auto v = parse_verdict(verdict);
  if (v == recommend::Verdict::Accepted && replacement) throw ConfigError("--replacement only goes with reject");
  const auto entry = tb.review(term, LangTag::parse(lang), v, replacement, recommend::now_utc_iso8601());
  out << recommend::entry_to_json(entry) << "\n";
  return 0;
}

int cmd_export(const Common& c, const std::string& termbase, const std::string& out_file, std::ostream& out) {
  const std::string format = c.format == "json" ? "jsonl" : c.format;
  check_format(format, {"csv", "jsonl"});
  const recommend::Termbase tb = recommend::Termbase::load(termbase_path(termbase, c.config));
  const std::string content = format == "csv" ? tb.export_csv() : tb.export_jsonl();
  if (out_file.empty()) out << content;
  else write_file(out_file, content);
  return 0;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Path:
    case ErrorCode::Precondition:
    case ErrorCode::Io:
    case ErrorCode::Fixture:
    case ErrorCode::Checksum:
    case ErrorCode::NotFound:
      return 2;
    default:
      return 1;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Back-translation terminology checks"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", c.config, "Run configuration (TOML)");
    if (config_required) opt->required();
    sub->add_option("--format", c.format, "Output format: json, csv or md");
    sub->add_option("--seed", c.seed, "Override the run seed");
    sub->add_flag("--offline", c.offline, "Live providers answer from the cache only");
  };

  std::string out_dir = "out", human_eval, candidate, reference, lang = "en", input, en_file, eny_file, termbase,
              term, verdict, out_file, extract_lang;
  std::optional<std::string> replacement;

  auto* run = app.add_subcommand("run", "Run every configured path and write reports");
  add_common(run, true);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--human-eval", human_eval, "Filled-in human evaluation rubric");

  auto* score = app.add_subcommand("score", "Score a candidate text against a reference");
  add_common(score, false);
  score->add_option("--candidate", candidate)->required();
  score->add_option("--reference", reference)->required();
  score->add_option("--lang", lang);

  auto* extract = app.add_subcommand("extract", "Extract terms from the source or a file");
  add_common(extract, true);
  extract->add_option("--input", input);
  extract->add_option("--lang", extract_lang, "Language of --input (default: the source language)");

  auto* align = app.add_subcommand("align", "Align two term lists, one term per line");
  add_common(align, false);
  align->add_option("--en", en_file)->required();
  align->add_option("--eny", eny_file)->required();

  auto* rec = app.add_subcommand("recommend", "Run and print recommendations");
  add_common(rec, true);
  rec->add_option("--termbase", termbase);

  auto* review = app.add_subcommand("review", "Record a review verdict");
  add_common(review, false);
  review->add_option("--termbase", termbase);
  review->add_option("--term", term)->required();
  review->add_option("--lang", lang)->required();
  review->add_option("--verdict", verdict)->required();
  review->add_option("--replacement", replacement);

  auto* exp = app.add_subcommand("export", "Export the termbase");
  add_common(exp, false);
  exp->add_option("--termbase", termbase);
  exp->add_option("--out", out_file);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error[E_USAGE]: {}\n", e.what());
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(c, out_dir, human_eval, out);
    if (score->parsed()) return cmd_score(c, candidate, reference, lang, out);
    if (extract->parsed()) return cmd_extract(c, input, extract_lang, out);
    if (align->parsed()) return cmd_align(c, en_file, eny_file, out);
    if (rec->parsed()) return cmd_recommend(c, termbase, out, err);
    if (review->parsed()) return cmd_review(c, termbase, term, lang, verdict, replacement, out);
    if (exp->parsed()) return cmd_export(c, termbase, out_file, out);
  } catch (const Error& e) {
    fmt::print(err, "error[{}]: {}\n", code_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    fmt::print(err, "error[E_INTERNAL]: {}\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace termbt::cli
