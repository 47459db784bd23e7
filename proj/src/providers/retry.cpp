#include "termbt/retry.hpp"

#include <fmt/format.h>

#include <cmath>
#include <thread>

namespace termbt {

void RetryPolicy::validate() const {
  if (max_attempts < 1) {
    throw Error(ErrorCode::Precondition,
                fmt::format("retry policy needs max_attempts >= 1, got {}", max_attempts));
  }
  if (initial_backoff.count() < 0 || max_backoff.count() < 0 || multiplier < 1.0) {
    throw Error(ErrorCode::Precondition, "retry backoff must be non-negative with multiplier >= 1");
  }
}

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
  const double scaled =
      static_cast<double>(initial_backoff.count()) * std::pow(multiplier, std::max(0, attempt - 1));
  const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds delay) { std::this_thread::sleep_for(delay); };
}

}  // namespace termbt
