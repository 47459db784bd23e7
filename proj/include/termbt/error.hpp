#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace termbt {

enum class ErrorCode {
  Config,
  Path,
  Precondition,
  Transport,
  RateLimited,
  Refusal,
  Parse,
  Io,
  Lock,
  CacheCorrupt,
  Fixture,
  Checksum,
  Termbase,
  NotFound,
};

// Stable machine-readable name, e.g. "E_CONFIG".
const char* code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorCode::Config, message) {}
};

class PathError : public Error {
 public:
  explicit PathError(const std::string& message) : Error(ErrorCode::Path, message) {}
};

/// Failure raised by a translation, embedding or extraction provider.
///
/// Retryable failures (transport, rate limit) are retried by with_retry();
/// everything else propagates on the first attempt.
class ProviderError : public Error {
 public:
  ProviderError(ErrorCode code, std::string provider, const std::string& message,
                bool retryable);

  const std::string& provider() const noexcept { return provider_; }
  bool retryable() const noexcept { return retryable_; }
  int attempts() const noexcept { return attempts_; }
  std::optional<std::chrono::milliseconds> retry_after() const noexcept { return retry_after_; }

  ProviderError with_attempts(int attempts) const;
  ProviderError with_retry_after(std::chrono::milliseconds delay) const;

 private:
  std::string provider_;
  bool retryable_;
  int attempts_ = 1;
  std::optional<std::chrono::milliseconds> retry_after_;
};

}  // namespace termbt
