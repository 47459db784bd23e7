#include "termbt/error.hpp"

#include <fmt/format.h>

namespace termbt {

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "E_CONFIG";
    case ErrorCode::Path: return "E_PATH";
    case ErrorCode::Precondition: return "E_PRECONDITION";
    case ErrorCode::Transport: return "E_TRANSPORT";
    case ErrorCode::RateLimited: return "E_RATE_LIMITED";
    case ErrorCode::Refusal: return "E_REFUSAL";
    case ErrorCode::Parse: return "E_PARSE";
    case ErrorCode::Io: return "E_IO";
    case ErrorCode::Lock: return "E_LOCK";
    case ErrorCode::CacheCorrupt: return "E_CACHE_CORRUPT";
    case ErrorCode::Fixture: return "E_FIXTURE";
    case ErrorCode::Checksum: return "E_CHECKSUM";
    case ErrorCode::Termbase: return "E_TERMBASE";
    case ErrorCode::NotFound: return "E_NOT_FOUND";
  }
  return "E_UNKNOWN";
}

ProviderError::ProviderError(ErrorCode code, std::string provider, const std::string& message,
                             bool retryable)
    : Error(code, fmt::format("provider '{}': {}", provider, message)),
      provider_(std::move(provider)),
      retryable_(retryable) {}

ProviderError ProviderError::with_attempts(int attempts) const {
  // Rebuild the message so the attempt count is visible to operators.
  std::string base = what();
  if (auto pos = base.rfind(" (after "); pos != std::string::npos) base.resize(pos);
  ProviderError copy(code(), provider_, "", retryable_);
  static_cast<std::runtime_error&>(copy) =
      std::runtime_error(fmt::format("{} (after {} attempt{})", base, attempts, attempts == 1 ? "" : "s"));
  copy.attempts_ = attempts;
  copy.retry_after_ = retry_after_;
  return copy;
}

ProviderError ProviderError::with_retry_after(std::chrono::milliseconds delay) const {
  ProviderError copy = *this;
  copy.retry_after_ = delay;
  return copy;
}

}  // namespace termbt
