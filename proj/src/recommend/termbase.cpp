#include <fcntl.h>
#include <fmt/format.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "termbt/error.hpp"
#include "termbt/lexicon.hpp"
#include "termbt/recommend.hpp"

namespace termbt::recommend {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ojson to_json(const TermbaseEntry& e) {
  ojson candidates = ojson::array();
  for (const Candidate& c : e.candidates) candidates.push_back(ojson{{"l2_term", c.l2_term}, {"confidence", c.confidence}});
  ojson reviews = ojson::array();
  for (const Review& r : e.reviews) {
    reviews.push_back(ojson{{"verdict", to_string(r.verdict)},
                            {"replacement", r.replacement ? ojson(*r.replacement) : ojson()},
                            {"timestamp", r.timestamp}});
  }
  return ojson{{"en_term", e.en_term},
               {"lang", e.lang.code()},
               {"l2_term", e.l2_term},
               {"status", to_string(e.status)},
               {"candidates", candidates},
               {"confidence", e.confidence},
               {"provenance",
                ojson{{"run_id", e.provenance.run_id},
                      {"path_labels", e.provenance.path_labels},
                      {"timestamp", e.provenance.timestamp}}},
               {"reviews", reviews}};
}

TermbaseEntry from_json(const ojson& j) {
  const ojson& prov = j.at("provenance");
  TermbaseEntry e{j.at("en_term").get<std::string>(),
                  LangTag::parse(j.at("lang").get<std::string>()),
                  j.at("l2_term").get<std::string>(),
                  status_from_string(j.at("status").get<std::string>()),
                  {},
                  j.at("confidence").get<double>(),
                  Provenance{prov.at("run_id").get<std::string>(),
                             prov.at("path_labels").get<std::vector<std::string>>(),
                             prov.at("timestamp").get<std::string>()},
                  {}};
  for (const auto& c : j.at("candidates")) {
    e.candidates.push_back(Candidate{c.at("l2_term").get<std::string>(), c.at("confidence").get<double>()});
  }
  for (const auto& r : j.at("reviews")) {
    Review review{verdict_from_string(r.at("verdict").get<std::string>()), std::nullopt,
                  r.at("timestamp").get<std::string>()};
    if (!r.at("replacement").is_null()) review.replacement = r.at("replacement").get<std::string>();
    e.reviews.push_back(std::move(review));
  }
  return e;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class LockFile {
 public:
  LockFile(const std::filesystem::path& target, std::chrono::milliseconds timeout) {
    const std::string lock_path = target.string() + ".lock";
    fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::Io, fmt::format("cannot open lock file '{}'", lock_path));
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      if (std::chrono::steady_clock::now() >= deadline) {
        ::close(fd_);
        throw Error(ErrorCode::Lock, fmt::format("timed out waiting for termbase lock '{}'", lock_path));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  ~LockFile() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

std::string entry_to_json(const TermbaseEntry& entry) { return to_json(entry).dump(); }

TermbaseEntry entry_from_json(std::string_view line) {
  ojson j = ojson::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::Termbase, "entry is not a JSON object");
  try {
    return from_json(j);
  } catch (const ojson::exception& e) {
    throw Error(ErrorCode::Termbase, fmt::format("malformed entry: {}", e.what()));
  } catch (const Error& e) {
    throw Error(ErrorCode::Termbase, fmt::format("malformed entry: {}", e.what()));
  }
}

Termbase::Termbase(std::filesystem::path path) : path_(std::move(path)) {}

Termbase Termbase::load(const std::filesystem::path& path) {
  Termbase tb(path);
  tb.reload();
  return tb;
}

void Termbase::reload() {
  live_.clear();
  history_.clear();
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  const std::string content = read_text_file(path_);
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      ojson h = ojson::parse(line, nullptr, false);
      if (h.is_discarded() || !h.is_object() || h.value("format", "") != "termbase") {
        throw Error(ErrorCode::Termbase, fmt::format("{}:{}: missing termbase header", path_.string(), line_no));
      }
      if (h.value("version", 0) != kFormatVersion) {
        throw Error(ErrorCode::Termbase, fmt::format("{}:{}: unsupported termbase version {}", path_.string(), line_no,
                                                     h.value("version", 0)));
      }
      header = true;
      continue;
    }
    try {
      apply(entry_from_json(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::Termbase, fmt::format("{}:{}: {}", path_.string(), line_no, e.what()));
    }
  }
}

void Termbase::apply(TermbaseEntry entry) {
  Key key{entry.en_term, entry.lang.code()};
  history_.push_back(entry);
  live_.insert_or_assign(std::move(key), std::move(entry));
}

const TermbaseEntry* Termbase::find(const std::string& en_term, const LangTag& lang) const {
  auto it = live_.find(Key{en_term, lang.code()});
  return it == live_.end() ? nullptr : &it->second;
}

std::uint64_t Termbase::upsert(TermbaseEntry entry) {
  std::vector<TermbaseEntry> one;
  one.push_back(std::move(entry));
  return upsert_all(std::move(one));
}

std::uint64_t Termbase::upsert_all(std::vector<TermbaseEntry> entries) {
  LockFile lock(path_, lock_timeout_);
  reload();
  const auto saved_live = live_;
  const auto saved_history = history_;
  for (TermbaseEntry& entry : entries) {
    if (entry.en_term.empty()) throw Error(ErrorCode::Precondition, "termbase entry has an empty en_term");
    if (!entry.candidates.empty() && entry.status == Status::Standardized &&
        entry.candidates.front().l2_term != entry.l2_term && entry.reviews.empty()) {
      throw Error(ErrorCode::Precondition,
                  fmt::format("standardized entry '{}' must lead its candidates with its l2 term", entry.en_term));
    }
    if (const TermbaseEntry* prior = find(entry.en_term, entry.lang)) {
      const auto& old = prior->reviews;
      const bool carried = entry.reviews.size() >= old.size() && std::equal(old.begin(), old.end(), entry.reviews.begin());
      if (!carried) entry.reviews.insert(entry.reviews.begin(), old.begin(), old.end());
    }
    apply(std::move(entry));
  }
  try {
    write_all();
  } catch (...) {
    live_ = saved_live;
    history_ = saved_history;
    throw;
  }
  return revision();
}

void Termbase::write_all() const {
  std::string content = ojson{{"format", "termbase"}, {"version", kFormatVersion}}.dump() + "\n";
  for (const TermbaseEntry& e : history_) content += entry_to_json(e) + "\n";

  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  const std::filesystem::path tmp = path_.string() + fmt::format(".tmp.{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", tmp.string()));
    const std::size_t half = content.size() / 2;
    out.write(content.data(), static_cast<std::streamsize>(half));
    out.flush();
    if (fault_hook_) fault_hook_("partial");
    out.write(content.data() + half, static_cast<std::streamsize>(content.size() - half));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, fmt::format("error writing '{}'", tmp.string()));
  }
  {
    const int fd = ::open(tmp.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd >= 0) {
      ::fsync(fd);
      ::close(fd);
    }
  }
  if (fault_hook_) fault_hook_("temp_written");
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot replace '{}': {}", path_.string(), ec.message()));
}

TermbaseEntry Termbase::review(const std::string& en_term, const LangTag& lang, Verdict verdict,
                               std::optional<std::string> replacement, const std::string& timestamp) {
  reload();
  const TermbaseEntry* current = find(en_term, lang);
  if (current == nullptr) {
    throw Error(ErrorCode::NotFound, fmt::format("no termbase entry for '{}' in '{}'", en_term, lang.code()));
  }
  TermbaseEntry next = *current;
  if (verdict == Verdict::Accepted) {
    next.status = Status::Standardized;
  } else if (replacement && !replacement->empty()) {
    next.l2_term = *replacement;
    next.status = Status::Standardized;
  } else {
    next.status = Status::NeedsReview;
  }
  next.reviews.push_back(Review{verdict, std::move(replacement), timestamp});
  upsert(next);
  return next;
}

std::string Termbase::export_csv() const {
  std::string out = "en_term,lang,l2_term,status,confidence\n";
  for (const auto& [key, e] : live_) {  // std::map keeps (en_term, lang) order
    out += fmt::format("{},{},{},{},{:.4f}\n", csv_field(e.en_term), csv_field(e.lang.code()), csv_field(e.l2_term),
                       to_string(e.status), e.confidence);
  }
  return out;
}

std::string Termbase::export_jsonl() const {
  std::string out;
  for (const auto& [key, e] : live_) out += entry_to_json(e) + "\n";
  return out;
}

std::vector<TermbaseEntry> Termbase::import_jsonl(std::string_view content) {
  std::vector<TermbaseEntry> out;
  std::size_t line_no = 0;
  while (!content.empty()) {
    ++line_no;
    const std::size_t nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    content.remove_prefix(nl == std::string_view::npos ? content.size() : nl + 1);
    if (line.empty()) continue;
    try {
      out.push_back(entry_from_json(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::Termbase, fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

}  // namespace termbt::recommend
