// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace licensekit {

/// Runs fn(i) for i in [0, n) with at most `limit` calls in flight.
///
/// Workers pull indices from a shared counter, so results written by index are
/// independent of completion order. If any call throws, remaining indices are
/// abandoned and the exception from the lowest failing index is rethrown.
template <class Fn>
void bounded_for(std::size_t n, std::size_t limit, Fn&& fn) {
    if (n == 0) {
        return;
    }
    limit = std::clamp<std::size_t>(limit, 1, n);
    if (limit == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::exception_ptr> errors(n);

    auto worker = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) {
                return;
            }
            const auto i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(limit);
        for (std::size_t t = 0; t < limit; ++t) {
            pool.emplace_back(worker);
        }
    }

    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace licensekit
