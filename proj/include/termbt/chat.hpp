#pragma once

// HTTP plumbing for live providers: endpoint settings, transport, token
// bucket, on-disk response cache and the client that ties them together.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "termbt/retry.hpp"

namespace termbt {

struct EndpointSpec {
  std::string name;
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string token_env;  // name of the environment variable holding the bearer token
  std::string response_path = "/choices/0/message/content";  // JSON pointer
  double rate_per_second = 1.0;
  int max_attempts = 3;
  int initial_backoff_ms = 500;
  int timeout_seconds = 60;
  double temperature = 0.0;

  friend bool operator==(const EndpointSpec&, const EndpointSpec&) = default;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::optional<std::chrono::milliseconds> retry_after;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws ProviderError(Transport, retryable) when no response arrives.
  virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                 const HttpHeaders& headers) = 0;
};

std::shared_ptr<HttpTransport> make_http_transport(const std::string& provider_id,
                                                   const std::string& base_url,
                                                   std::chrono::seconds timeout);

/// Token bucket; acquire() blocks until a token is available.
class RateLimiter {
 public:
  RateLimiter(double per_second, double burst);
  void acquire();

 private:
  std::mutex mutex_;
  double per_second_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

/// Content-addressed response store. Entries are written to a temporary file
/// and renamed into place, so readers never observe a partial entry.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  static std::string make_key(std::string_view provider, std::string_view model,
                              std::string_view prompt_hash, std::string_view input_hash);

  /// Throws Error(CacheCorrupt) when the stored entry cannot be read back.
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& payload) const;
  std::filesystem::path entry_path(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct PromptTemplate {
  std::string system;
  std::string user;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// Replaces {name} placeholders; unknown placeholders are left untouched.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Editable defaults: "translate", "translate-discovery", "extract-terms",
/// "extract-aligned".
const std::map<std::string, PromptTemplate>& builtin_prompts();

struct ChatRequest {
  std::string system;
  std::string user;
  std::string input;  // the raw text being processed; hashed into the cache key
};

/// Client for one live provider. Thread safe.
class ChatClient {
 public:
  struct Options {
    std::string provider_id;
    EndpointSpec endpoint;
    bool offline = false;
    std::shared_ptr<ResponseCache> cache;
    Sleeper sleeper;
  };

  ChatClient(Options options, std::shared_ptr<HttpTransport> transport);

  /// Chat completion; returns the string found at the endpoint's response path.
  std::string complete(const ChatRequest& request);
  /// Embedding request; returns the numeric array found at the response path.
  std::vector<double> embed(std::string_view text);

  const std::string& provider_id() const { return options_.provider_id; }
  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::string fetch(const std::string& body, const std::string& cache_key, bool expect_array);

  Options options_;
  std::shared_ptr<HttpTransport> transport_;
  RateLimiter limiter_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace termbt
