#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "termbt/chat.hpp"
#include "termbt/config.hpp"
#include "termbt/consistency.hpp"
#include "termbt/terms.hpp"

namespace termbt::testing {

std::filesystem::path source_dir();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);

/// Scripted HTTP transport. The handler sees the request body and the call
/// number (1-based).
class FakeTransport : public HttpTransport {
 public:
  using Handler = std::function<HttpResponse(const std::string& body, int call)>;
  explicit FakeTransport(Handler handler) : handler_(std::move(handler)) {}
  HttpResponse post_json(const std::string& path, const std::string& body, const HttpHeaders& headers) override;
  int calls() const;
  std::vector<std::string> bodies() const;

 private:
  Handler handler_;
  mutable std::mutex mutex_;
  int calls_ = 0;
  std::vector<std::string> bodies_;
};

/// Chat-completions JSON reply carrying `content`.
std::string chat_reply(const std::string& content);

RunConfig config_from(const std::string& toml, const std::filesystem::path& base = source_dir() / "configs");

// Hand-rolled generators over a fixed-seed engine.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return real() < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }

  /// Tokens drawn from a vocabulary of `vocab` words.
  std::vector<std::string> tokens(int min_len, int max_len, int vocab);
  /// Arbitrary Unicode mix: ASCII, punctuation, whitespace, accents, CJK, combining marks.
  std::string unicode_text(int max_codepoints);
  /// Lowercase multi-word phrase.
  std::string phrase(int max_words);
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

struct PropertyResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;
  bool ok() const { return failures == 0 && cases > 0; }
};

// Each runs `cases` generated inputs and checks them against an oracle.
PropertyResult check_metric_ranges(std::uint64_t seed, int cases);
PropertyResult check_smr_ge_emr(std::uint64_t seed, int cases);
PropertyResult check_tdi_axioms(std::uint64_t seed, int cases);
PropertyResult check_normalize_idempotence(std::uint64_t seed, int cases);
PropertyResult check_alignment_injectivity(std::uint64_t seed, int cases);
PropertyResult check_termbase_crash_safety(std::uint64_t seed, int cases);

/// TVD computed from raw counts, independent of the library.
double brute_force_tvd(const std::vector<std::string>& a, const std::vector<std::string>& b);

terms::Term make_term(const std::string& surface, const std::string& lang = "en");

}  // namespace termbt::testing
