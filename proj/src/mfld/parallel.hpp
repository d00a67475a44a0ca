#pragma once

#include <cstdint>
#include <functional>

namespace mfld {

// Worker count used by parallel_for. 0 means "read MFLD_THREADS, else hardware".
void set_thread_count(int threads);
int thread_count();

// Calls body(i) for i in [begin, end). Each index is handled by exactly one
// worker; callers write results into per-index slots and reduce serially, so
// outputs never depend on the worker count.
void parallel_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& body);

}  // namespace mfld
