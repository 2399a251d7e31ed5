#pragma once

#include <cstddef>
#include <functional>

namespace wpl {

// thread count from WPL_THREADS (default: hardware concurrency); 1 means serial
int thread_count();
void set_thread_count(int t);  // 0 resets to the environment value

// runs body(i) for i in [0, n); iterations must write to disjoint slots
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wpl
