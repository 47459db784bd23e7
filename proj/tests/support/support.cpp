#include "support.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <stdexcept>

#include "termbt/consistency.hpp"
#include "termbt/embedding.hpp"
#include "termbt/recommend.hpp"
#include "termbt/textmetrics.hpp"
#include "termbt/unicode.hpp"

namespace termbt::testing {

namespace fs = std::filesystem;

fs::path source_dir() { return TERMBT_SOURCE_DIR; }

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "termbt-test-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

HttpResponse FakeTransport::post_json(const std::string&, const std::string& body, const HttpHeaders&) {
  int n = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    n = ++calls_;
    bodies_.push_back(body);
  }
  return handler_(body, n);
}

int FakeTransport::calls() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

std::vector<std::string> FakeTransport::bodies() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return bodies_;
}

std::string chat_reply(const std::string& content) {
  nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
  return j.dump();
}

RunConfig config_from(const std::string& toml, const fs::path& base) { return parse_config(toml, base); }

std::vector<std::string> Gen::tokens(int min_len, int max_len, int vocab) {
  const int n = range(min_len, max_len);
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(fmt::format("w{}", range(0, vocab - 1)));
  return out;
}

std::string Gen::unicode_text(int max_codepoints) {
  static const std::vector<char32_t> pool = {
      U'a', U'b', U'Z', U's', U'S', U'1', U'9', U' ', U' ', U'\t', U'\n', U'.', U',', U'(', U')', U'[', U']',
      U'"', U'\'', U'-', U'%', U'#', U'!', U'?', U':', U';', U'/', U'é', U'É', U'ß', U'İ',
      U'Σ', U'σ', U'́', U'̈', U' ', U' ', U'　', U'“', U'”',
      U'中', U'文', U'模', U'型', U'（', U'）', U'。', U'½', U'ﬁ',
      U'Å', U'ẞ', U'\U0001F600', U'א', U'ا', U'ก', U'​'};
  const int n = range(0, max_codepoints);
  std::string out;
  for (int i = 0; i < n; ++i) unicode::append(out, pick(pool));
  return out;
}

std::string Gen::phrase(int max_words) {
  static const std::vector<std::string> words = {"deep",  "residual", "network", "networks", "net",   "nets",
                                                 "layer", "learning", "neural",  "model",    "graph", "task",
                                                 "image", "training", "vgg",     "error",    "rate",  "block"};
  const int n = range(1, max_words);
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " " : "") + pick(words);
  return out;
}

terms::Term make_term(const std::string& surface, const std::string& lang) {
  return terms::Term{surface, terms::normalize_term(surface), LangTag::parse(lang), std::nullopt,
                     terms::TermSource::Dictionary};
}

namespace {

struct Tracker {
  PropertyResult result;
  void fail(const std::string& what) {
    if (result.failures++ == 0) result.first_failure = what;
  }
  void check(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }
};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out;
}

bool close(double a, double b, double tol = 1e-9) { return std::fabs(a - b) <= tol; }

}  // namespace

double brute_force_tvd(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  // max over events S of |P(S) - Q(S)|, enumerating every subset of the support
  std::vector<std::string> support(a.begin(), a.end());
  support.insert(support.end(), b.begin(), b.end());
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (support.size() > 20) throw std::invalid_argument("support too large for brute force");
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << support.size()); ++mask) {
    std::set<std::string> event;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (mask & (1u << i)) event.insert(support[i]);
    }
    double pa = 0.0;
    double pb = 0.0;
    for (const auto& t : a) pa += event.count(t) ? 1.0 : 0.0;
    for (const auto& t : b) pb += event.count(t) ? 1.0 : 0.0;
    pa /= static_cast<double>(a.size());
    pb = b.empty() ? 0.0 : pb / static_cast<double>(b.size());
    best = std::max(best, std::fabs(pa - pb));
  }
  return b.empty() ? 1.0 : best;
}

PropertyResult check_metric_ranges(std::uint64_t seed, int cases) {
  Tracker t{{"metric ranges", cases, 0, {}}};
  Gen g(seed);
  HashedNgramEmbedder embedder;
  for (int i = 0; i < cases; ++i) {
    const auto cand = g.tokens(1, 12, 8);
    const auto ref = g.tokens(1, 12, 8);
    textmetrics::MetricParams p;
    p.bleu_max_n = g.range(1, 4);
    p.zero_ngram_policy = g.coin() ? textmetrics::ZeroNgramPolicy::Floor : textmetrics::ZeroNgramPolicy::TruncateN;
    p.meteor_alpha = g.real();
    p.meteor_gamma = g.real(0.0, 1.0);
    const std::string where = fmt::format("case {}: cand='{}' ref='{}'", i, join(cand), join(ref));

    const double b = textmetrics::bleu(cand, ref, p).score;
    t.check(b >= 0.0 && b <= 1.0, where + fmt::format(" bleu={}", b));
    const double te = textmetrics::ter(cand, ref).score;
    t.check(te >= 0.0, where + fmt::format(" ter={}", te));
    const double m = textmetrics::meteor(cand, ref, p).score;
    t.check(m >= 0.0 && m <= 1.0, where + fmt::format(" meteor={}", m));
    const double f = textmetrics::semantic_f1(cand, ref, embedder).f1;
    t.check(f >= -1.0 && f <= 1.0, where + fmt::format(" semantic_f1={}", f));
    const double c = textmetrics::cosine_similarity(join(cand), join(ref), embedder);
    t.check(c >= -1.0 && c <= 1.0, where + fmt::format(" cosine={}", c));

    // identity closed forms
    const double n = static_cast<double>(ref.size());
    // shorter than N under Floor leaves empty orders at epsilon
    const bool full_orders = ref.size() >= static_cast<std::size_t>(p.bleu_max_n) ||
                             p.zero_ngram_policy == textmetrics::ZeroNgramPolicy::TruncateN;
    const double bleu_id = textmetrics::bleu(ref, ref, p).score;
    double want = 1.0;
    if (!full_orders) {
      const auto w = p.weights();
      for (std::size_t k = ref.size(); k < w.size(); ++k) want *= std::pow(p.floor_epsilon, w[k]);
    }
    t.check(close(bleu_id, want, 1e-12), where + fmt::format(" bleu(x,x)={} want {}", bleu_id, want));
    t.check(textmetrics::ter(ref, ref).score == 0.0, where + " ter(x,x)");
    const double meteor_id = 1.0 - p.meteor_gamma * std::pow(1.0 / n, 3.0);
    t.check(close(textmetrics::meteor(ref, ref, p).score, meteor_id), where + " meteor(x,x)");
    t.check(close(textmetrics::semantic_f1(ref, ref, embedder).f1, 1.0), where + " semantic_f1(x,x)");
    t.check(close(textmetrics::cosine_similarity(join(ref), join(ref), embedder), 1.0), where + " cosine(x,x)");
  }
  return t.result;
}

PropertyResult check_smr_ge_emr(std::uint64_t seed, int cases) {
  Tracker t{{"SMR >= EMR", cases, 0, {}}};
  Gen g(seed);
  HashedNgramEmbedder embedder;
  for (int i = 0; i < cases; ++i) {
    const int n = g.range(1, 12);
    std::vector<consistency::TermRecord> records;
    int exact = 0;
    int semantic = 0;
    for (int k = 0; k < n; ++k) {
      consistency::TermRecord r{termbt::testing::make_term("x")};
      r.en = make_term(g.phrase(3));
      if (!g.coin(0.15)) r.eny = make_term(g.coin(0.4) ? r.en.surface : g.phrase(3));
      const auto m = consistency::classify_match(r.en, r.eny, embedder, g.real(0.3, 0.95));
      r.exact_match = m.exact;
      r.semantic_match = m.semantic;
      r.semantic_score = m.score;
      r.irs = consistency::score_irs(r);
      exact += r.exact_match ? 1 : 0;
      semantic += r.semantic_match ? 1 : 0;
      records.push_back(std::move(r));
    }
    const auto rep = consistency::compute_report("p", records, {}, std::nullopt);
    const std::string where = fmt::format("case {}: n={} exact={} semantic={}", i, n, exact, semantic);
    t.check(rep.smr >= rep.emr, where + fmt::format(" smr={} emr={}", rep.smr, rep.emr));
    t.check(close(rep.emr, 100.0 * exact / n), where + fmt::format(" emr={}", rep.emr));
    t.check(close(rep.smr, 100.0 * semantic / n), where + fmt::format(" smr={}", rep.smr));
  }
  return t.result;
}

PropertyResult check_tdi_axioms(std::uint64_t seed, int cases) {
  Tracker t{{"TDI axioms", cases, 0, {}}};
  Gen g(seed);
  auto multiset = [&](int min) {
    std::vector<std::string> out;
    const int n = g.range(min, 8);
    for (int i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('a' + g.range(0, 4))));
    return out;
  };
  for (int i = 0; i < cases; ++i) {
    const auto a = multiset(1);
    const auto b = multiset(1);
    const auto c = multiset(1);
    const std::string where = fmt::format("case {}: a='{}' b='{}' c='{}'", i, join(a), join(b), join(c));
    const double ab = consistency::compute_tdi(a, b);
    const double ba = consistency::compute_tdi(b, a);
    const double bc = consistency::compute_tdi(b, c);
    const double ac = consistency::compute_tdi(a, c);
    t.check(close(ab, brute_force_tvd(a, b)), where + fmt::format(" tdi={} oracle={}", ab, brute_force_tvd(a, b)));
    t.check(close(ab, ba), where + " symmetry");
    t.check(ac <= ab + bc + 1e-12, where + " triangle");
    t.check(consistency::compute_tdi(a, a) == 0.0, where + " identity");
    auto shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
    t.check(consistency::compute_tdi(a, shuffled) == 0.0, where + " order independence");
    if (ab == 0.0) {
      // zero distance means equal frequency distributions
      std::map<std::string, double> fa, fb;
      for (const auto& s : a) fa[s] += 1.0 / static_cast<double>(a.size());
      for (const auto& s : b) fb[s] += 1.0 / static_cast<double>(b.size());
      bool same = fa.size() == fb.size();
      for (const auto& [k, v] : fa) same = same && fb.count(k) && close(fb[k], v);
      t.check(same, where + " zero distance on different distributions");
    }
  }
  return t.result;
}

PropertyResult check_normalize_idempotence(std::uint64_t seed, int cases) {
  Tracker t{{"normalize_term idempotence", cases, 0, {}}};
  Gen g(seed);
  for (int i = 0; i < cases; ++i) {
    std::string s = g.unicode_text(24);
    if (g.coin(0.3)) s = "  " + g.phrase(3) + (g.coin() ? "s" : "") + ". ";
    terms::KnownForms known;
    for (int k = 0; k < 3; ++k) known.insert(g.phrase(2));
    const std::string where = fmt::format("case {}: input='{}'", i, s);
    try {
      const std::string once = terms::normalize_term(s, &known);
      t.check(terms::normalize_term(once, &known) == once, where + " once='" + once + "'");
      const std::string plain = terms::normalize_term(s);
      t.check(terms::normalize_term(plain) == plain, where + " without known forms");
      t.check(terms::base_normalize(terms::base_normalize(s)) == terms::base_normalize(s), where + " base");
    } catch (const std::exception& e) {
      t.fail(where + " threw " + e.what());
    }
  }
  return t.result;
}

PropertyResult check_alignment_injectivity(std::uint64_t seed, int cases) {
  Tracker t{{"alignment injectivity", cases, 0, {}}};
  Gen g(seed);
  HashedNgramEmbedder embedder;
  auto term_list = [&](int max) {
    std::vector<terms::Term> out;
    std::set<std::string> seen;
    const int n = g.range(0, max);
    for (int k = 0; k < n; ++k) {
      terms::Term term = make_term(g.phrase(3));
      if (seen.insert(term.normalized).second) out.push_back(std::move(term));
    }
    return out;
  };
  for (int i = 0; i < cases; ++i) {
    auto en = term_list(8);
    if (en.empty()) en.push_back(make_term(g.phrase(2)));
    auto eny = term_list(8);
    if (g.coin(0.3)) {
      const terms::Term& copy = en[g.index(en.size())];
      const bool present = std::any_of(eny.begin(), eny.end(), [&](const terms::Term& e) { return e.normalized == copy.normalized; });
      if (!present) eny.push_back(copy);
    }
    consistency::AlignOptions opts{g.real(0.2, 0.9), 0.75, nullptr};
    const auto al = consistency::align_terms(en, eny, {}, embedder, opts);
    const std::string where = fmt::format("case {}: |en|={} |eny|={}", i, en.size(), eny.size());

    t.check(al.records.size() == en.size(), where + " one record per EN term");
    // alignment may renormalize plurals against the corpus, so compare surfaces
    std::multiset<std::string> en_seen, eny_used;
    for (const auto& r : al.records) {
      en_seen.insert(r.en.surface);
      if (r.eny) eny_used.insert(r.eny->surface);
    }
    std::multiset<std::string> en_all;
    for (const auto& e : en) en_all.insert(e.surface);
    t.check(en_seen == en_all, where + " every EN term exactly once");
    for (const auto& s : eny_used) t.check(eny_used.count(s) == 1, where + " ENy term paired twice: " + s);
    std::multiset<std::string> eny_all, covered = eny_used;
    for (const auto& e : eny) eny_all.insert(e.surface);
    for (const auto& u : al.unmatched_eny) covered.insert(u.surface);
    t.check(covered == eny_all, where + " paired plus unmatched covers ENy exactly");
  }
  return t.result;
}

PropertyResult check_termbase_crash_safety(std::uint64_t seed, int cases) {
  Tracker t{{"termbase crash safety", cases, 0, {}}};
  Gen g(seed);
  TempDir dir;
  const std::vector<std::string> langs = {"zh-cn", "zh-tw", "ja"};
  auto entry = [&]() {
    recommend::TermbaseEntry e{g.phrase(2), LangTag::parse(g.pick(langs)), g.phrase(2), recommend::Status::NeedsReview,
                               {}, g.real(), {"run", {"p"}, "2026-01-01T00:00:00Z"}, {}};
    e.candidates.push_back({e.l2_term, e.confidence});
    if (g.coin()) e.status = recommend::Status::Standardized;
    return e;
  };
  struct Crash {};
  for (int i = 0; i < cases; ++i) {
    const fs::path path = dir / fmt::format("tb{}.jsonl", i % 50);
    std::error_code ec;
    fs::remove(path, ec);
    {
      recommend::Termbase tb(path);
      std::vector<recommend::TermbaseEntry> initial;
      for (int k = g.range(0, 3); k > 0; --k) initial.push_back(entry());
      if (!initial.empty()) tb.upsert_all(initial);
    }
    const auto before = recommend::Termbase::load(path);

    recommend::Termbase writer(path);
    const int mode = g.range(0, 2);  // 0: crash mid-file, 1: crash before rename, 2: no crash
    writer.set_fault_hook([mode](std::string_view stage) {
      if ((mode == 0 && stage == "partial") || (mode == 1 && stage == "temp_written")) throw Crash{};
    });
    std::vector<recommend::TermbaseEntry> update;
    for (int k = g.range(1, 3); k > 0; --k) update.push_back(entry());
    bool crashed = false;
    try {
      writer.upsert_all(update);
    } catch (const Crash&) {
      crashed = true;
    }
    const std::string where = fmt::format("case {}: mode={}", i, mode);
    t.check(crashed == (mode != 2), where + " crash hook did not fire as scheduled");

    try {
      const auto after = recommend::Termbase::load(path);
      if (crashed) {
        t.check(after.history() == before.history() && after.live() == before.live(), where + " not the old state");
        t.check(writer.history() == before.history(), where + " writer kept uncommitted entries in memory");
      } else {
        t.check(after.history().size() == before.history().size() + update.size(), where + " not the new state");
        t.check(after.history() == writer.history(), where + " reload differs from writer");
      }
    } catch (const std::exception& e) {
      t.fail(where + " store unreadable after interruption: " + e.what());
    }
  }
  return t.result;
}

}  // namespace termbt::testing
