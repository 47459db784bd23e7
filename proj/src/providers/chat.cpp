#include "termbt/chat.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "termbt/digest.hpp"
#include "termbt/error.hpp"
#include "termbt/lexicon.hpp"

namespace termbt {

namespace {

using nlohmann::json;

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(std::string provider_id, const std::string& base_url, std::chrono::seconds timeout)
      : provider_id_(std::move(provider_id)), client_(base_url) {
    client_.set_connection_timeout(timeout);
    client_.set_read_timeout(timeout);
    client_.set_write_timeout(timeout);
  }

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const HttpHeaders& headers) override {
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    std::lock_guard<std::mutex> lock(mutex_);
    auto res = client_.Post(path, h, body, "application/json");
    if (!res) {
      throw ProviderError(ErrorCode::Transport, provider_id_,
                          fmt::format("request failed: {}", httplib::to_string(res.error())), true);
    }
    HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    if (res->has_header("Retry-After")) {
      const std::string raw = res->get_header_value("Retry-After");
      char* end = nullptr;
      const long seconds = std::strtol(raw.c_str(), &end, 10);
      if (end != raw.c_str() && seconds >= 0) out.retry_after = std::chrono::seconds(seconds);
    }
    return out;
  }

 private:
  std::string provider_id_;
  std::mutex mutex_;
  httplib::Client client_;
};

std::atomic<unsigned> temp_counter{0};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(const std::string& provider_id,
                                                   const std::string& base_url,
                                                   std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(provider_id, base_url, timeout);
}

RateLimiter::RateLimiter(double per_second, double burst)
    : per_second_(per_second),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (per_second_ <= 0.0) return;
  std::unique_lock<std::mutex> lock(mutex_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    tokens_ = std::min(burst_, tokens_ + elapsed * per_second_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / per_second_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ResponseCache::make_key(std::string_view provider, std::string_view model,
                                    std::string_view prompt_hash, std::string_view input_hash) {
  return sha256_hex(fmt::format("{}\x1f{}\x1f{}\x1f{}", provider, model, prompt_hash, input_hash));
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  const auto path = entry_path(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  std::string raw;
  try {
    raw = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::CacheCorrupt, e.what());
  }
  json entry = json::parse(raw, nullptr, false);
  if (entry.is_discarded() || !entry.is_object() || !entry.contains("key") ||
      !entry.contains("payload") || !entry["payload"].is_string() || entry["key"] != key) {
    throw Error(ErrorCode::CacheCorrupt, fmt::format("cache entry '{}' is corrupt", path.string()));
  }
  return entry["payload"].get<std::string>();
}

void ResponseCache::put(const std::string& key, const std::string& payload) const {
  const auto path = entry_path(key);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create cache dir '{}': {}", path.parent_path().string(), ec.message()));
  const auto tmp = path.parent_path() /
                   fmt::format(".{}.tmp.{}.{}", key, ::getpid(), temp_counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << json{{"key", key}, {"payload", payload}}.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write cache entry '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, fmt::format("cannot publish cache entry '{}'", path.string()));
  }
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

const std::map<std::string, PromptTemplate>& builtin_prompts() {
  static const std::map<std::string, PromptTemplate> prompts = {
      {"translate",
       {"You are a careful technical translator. Translate the user's text from {source_lang} to "
        "{target_lang}. Keep technical terms precise, keep acronyms as written, and return only the "
        "translation.",
        "{text}"}},
      {"translate-discovery",
       {"You are a technical translator working on terminology. Translate the user's text from "
        "{source_lang} to {target_lang}. When a technical term has no settled equivalent in "
        "{target_lang}, coin a rendering, put [NEW] right after it and add a one-line gloss at the "
        "end. Return only the translation and the glosses.",
        "{text}"}},
      {"extract-terms",
       {"You identify technical terms in {source_lang} text. Reply with a JSON array of strings, each "
        "a term exactly as written in the text, in order of first appearance. No commentary.",
        "{text}"}},
      {"extract-aligned",
       {"You compare terminology across a back-translation. Reply with a JSON array of objects with "
        "keys \"en\", \"l2\" and \"eny\": the source term, its {target_lang} rendering and its "
        "back-translated form. Use null when a stage omits the term. No commentary.",
        "{text}"}},
  };
  return prompts;
}

ChatClient::ChatClient(Options options, std::shared_ptr<HttpTransport> transport)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      limiter_(options_.endpoint.rate_per_second, 1.0) {
  if (!options_.sleeper) options_.sleeper = real_sleeper();
}

std::string ChatClient::complete(const ChatRequest& request) {
  const EndpointSpec& ep = options_.endpoint;
  json body = {{"model", ep.model},
               {"temperature", ep.temperature},
               {"messages",
                json::array({json{{"role", "system"}, {"content", request.system}},
                             json{{"role", "user"}, {"content", request.user}}})}};
  const std::string key = ResponseCache::make_key(
      options_.provider_id, ep.model, sha256_hex(request.system + "\x1f" + request.user),
      sha256_hex(request.input));
  return fetch(body.dump(), key, false);
}

std::vector<double> ChatClient::embed(std::string_view text) {
  const EndpointSpec& ep = options_.endpoint;
  json body = {{"model", ep.model}, {"input", std::string(text)}};
  const std::string key =
      ResponseCache::make_key(options_.provider_id, ep.model, sha256_hex("embedding"), sha256_hex(text));
  const std::string payload = fetch(body.dump(), key, true);
  json arr = json::parse(payload, nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    throw Error(ErrorCode::CacheCorrupt, fmt::format("provider '{}': cached embedding is not an array",
                                                     options_.provider_id));
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) out.push_back(v.get<double>());
  return out;
}

std::string ChatClient::fetch(const std::string& body, const std::string& cache_key, bool expect_array) {
  const std::string& id = options_.provider_id;
  if (options_.cache) {
    if (auto hit = options_.cache->get(cache_key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  if (options_.offline) {
    throw ProviderError(ErrorCode::Transport, id, "offline mode and no cached response for this request",
                        false);
  }
  const EndpointSpec& ep = options_.endpoint;
  HttpHeaders headers;
  if (!ep.token_env.empty()) {
    const char* token = std::getenv(ep.token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw ProviderError(ErrorCode::Config, id,
                          fmt::format("environment variable '{}' is not set", ep.token_env), false);
    }
    headers.emplace_back("Authorization", fmt::format("Bearer {}", token));
  }

  RetryPolicy policy;
  policy.max_attempts = ep.max_attempts;
  policy.initial_backoff = std::chrono::milliseconds(ep.initial_backoff_ms);

  auto attempt = [&]() -> std::string {
    limiter_.acquire();
    ++network_calls_;
    HttpResponse res = transport_->post_json(ep.path, body, headers);
    if (res.status == 429) {
      ProviderError err(ErrorCode::RateLimited, id, "rate limited (HTTP 429)", true);
      throw res.retry_after ? err.with_retry_after(*res.retry_after) : err;
    }
    if (res.status == 408 || res.status >= 500) {
      throw ProviderError(ErrorCode::Transport, id, fmt::format("server error (HTTP {})", res.status), true);
    }
    if (res.status < 200 || res.status >= 300) {
      throw ProviderError(ErrorCode::Refusal, id,
                          fmt::format("request rejected (HTTP {}): {}", res.status, res.body.substr(0, 200)),
                          false);
    }
    json doc = json::parse(res.body, nullptr, false);
    if (doc.is_discarded()) throw ProviderError(ErrorCode::Parse, id, "response is not valid JSON", false);
    json::json_pointer ptr;
    try {
      ptr = json::json_pointer(ep.response_path);
    } catch (const json::exception&) {
      throw ProviderError(ErrorCode::Config, id, fmt::format("bad response_path '{}'", ep.response_path), false);
    }
    if (!doc.contains(ptr)) {
      throw ProviderError(ErrorCode::Parse, id, fmt::format("response has no value at '{}'", ep.response_path),
                          false);
    }
    const json& value = doc.at(ptr);
    if (expect_array) {
      if (!value.is_array() || value.empty() ||
          !std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_number(); })) {
        throw ProviderError(ErrorCode::Parse, id, "embedding response is not a numeric array", false);
      }
      return value.dump();
    }
    if (!value.is_string()) {
      throw ProviderError(ErrorCode::Parse, id, fmt::format("value at '{}' is not a string", ep.response_path),
                          false);
    }
    std::string text = value.get<std::string>();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw ProviderError(ErrorCode::Refusal, id, "provider returned empty output", false);
    }
    return text;
  };

  std::string payload = with_retry(attempt, policy, options_.sleeper).value;
  if (options_.cache) options_.cache->put(cache_key, payload);
  return payload;
}

}  // namespace termbt
