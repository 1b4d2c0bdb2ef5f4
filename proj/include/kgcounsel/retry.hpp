#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include "kgcounsel/error.hpp"

namespace kgcounsel {

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{100};
    double multiplier = 2.0;

    void validate() const {
        if (max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "retry attempts must be >= 1");
    }
};

// Sleeps between attempts; tests swap in a no-op.
using SleepFn = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

// Runs `op` until it succeeds or the policy is exhausted. `is_retryable`
// inspects the exception currently being handled; non-retryable failures and
// the final failure propagate. `retries` counts re-attempts (attempts - 1).
template <typename Op, typename IsRetryable>
auto with_retry(const RetryPolicy& policy, Op&& op, IsRetryable&& is_retryable, int* retries = nullptr,
                const SleepFn& sleep = real_sleep) -> decltype(op()) {
    policy.validate();
    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return op();
        } catch (...) {
            if (attempt >= policy.max_attempts || !is_retryable(std::current_exception())) throw;
        }
        if (retries) ++*retries;
        if (backoff.count() > 0) sleep(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<std::chrono::milliseconds::rep>(static_cast<double>(backoff.count()) * policy.multiplier));
    }
}

}  // namespace kgcounsel
