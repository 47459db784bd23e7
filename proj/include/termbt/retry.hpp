#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <type_traits>

#include "termbt/error.hpp"

namespace termbt {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  /// Throws Error(Precondition) when max_attempts < 1 or the schedule is negative.
  void validate() const;
  /// Delay before attempt `attempt + 1`, given that `attempt` (1-based) failed.
  std::chrono::milliseconds delay_after(int attempt) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

Sleeper real_sleeper();

template <class T>
struct Attempted {
  T value;
  int attempts = 1;
};

/// Runs `op` until it succeeds, a non-retryable ProviderError is thrown, or
/// the attempt budget is spent. Thrown ProviderErrors carry the attempt count.
/// Exceptions other than ProviderError pass through untouched.
template <class Op>
auto with_retry(Op&& op, const RetryPolicy& policy, const Sleeper& sleep)
    -> Attempted<std::invoke_result_t<Op&>> {
  policy.validate();
  for (int attempt = 1;; ++attempt) {
    try {
      return {op(), attempt};
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= policy.max_attempts) throw e.with_attempts(attempt);
      auto delay = policy.delay_after(attempt);
      if (auto hint = e.retry_after()) delay = std::max(delay, *hint);
      if (sleep) sleep(delay);
    }
  }
}

}  // namespace termbt
