#include "mfld/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mfld {

namespace {
std::atomic<int> g_threads{0};

int env_threads() {
    if (const char* s = std::getenv("MFLD_THREADS")) {
        int v = std::atoi(s);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

void set_thread_count(int threads) { g_threads.store(threads < 0 ? 0 : threads); }

int thread_count() {
    int t = g_threads.load();
    return t > 0 ? t : env_threads();
}

void parallel_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& body) {
    if (end <= begin) return;
    const std::int64_t count = end - begin;
    const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), count));
    if (workers <= 1) {
        for (std::int64_t i = begin; i < end; ++i) body(i);
        return;
    }
    // dynamic scheduling: a shared counter hands out indices
    std::atomic<std::int64_t> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        try {
            for (;;) {
                std::int64_t i = next.fetch_add(1);
                if (i >= end) break;
                body(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(end);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace mfld
