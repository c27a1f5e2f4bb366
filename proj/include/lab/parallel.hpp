#pragma once

#include <functional>

namespace lab {

// Worker-thread cap: LAB_THREADS if set to a positive integer, otherwise
// std::thread::hardware_concurrency().
int worker_count();

// Runs fn(i) for i in [0, count). Work items must be independent and write
// only to their own preallocated slot so scheduling never changes results.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace lab
