/*
 * Copyright 2026-present scensim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace scensim {

inline int effective_workers(int workers, std::size_t items) {
    if (workers <= 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    if (items < static_cast<std::size_t>(workers)) {
        workers = static_cast<int>(std::max<std::size_t>(items, 1));
    }
    return workers;
}

/// Runs fn(i) for i in [0, items) on a work-stealing index pool. The first
/// exception thrown by any task propagates after all threads join.
inline void parallel_for(std::size_t items, int workers, const std::function<void(std::size_t)>& fn) {
    workers = effective_workers(workers, items);
    if (workers <= 1) {
        for (std::size_t i = 0; i < items; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= items) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace scensim
