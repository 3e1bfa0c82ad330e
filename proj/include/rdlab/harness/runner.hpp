#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rdlab::harness {

/// Results indexed by path id plus the order in which paths finished.
template <class T>
struct PathResults {
    std::vector<T> values;
    std::vector<int> completion;

    /// Path ids in reduction order: ascending when deterministic, else completion order.
    std::vector<int> order(bool deterministic) const {
        if (!deterministic) return completion;
        std::vector<int> ids(values.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
        return ids;
    }
};

/// Evaluates fn(path) for path = 0..count-1 on `threads` workers. The first
/// exception thrown by any worker is rethrown after all workers join.
template <class T>
PathResults<T> map_paths(int count, int threads, const std::function<T(int)>& fn) {
    PathResults<T> out;
    out.values.resize(static_cast<std::size_t>(count));
    out.completion.reserve(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    std::mutex lock;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                T value = fn(i);
                std::lock_guard<std::mutex> guard(lock);
                out.values[static_cast<std::size_t>(i)] = std::move(value);
                out.completion.push_back(i);
            } catch (...) {
                std::lock_guard<std::mutex> guard(lock);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace rdlab::harness
