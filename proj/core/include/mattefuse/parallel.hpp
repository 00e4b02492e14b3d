#pragma once

#include <functional>

namespace mattefuse {

// Process-wide worker count for row/pair-parallel loops. 0 selects
// std::thread::hardware_concurrency(). Work items never share output
// storage, so results do not depend on this setting.
void set_thread_count(unsigned count);
unsigned thread_count();

// Runs body(i) for i in [begin, end), split into contiguous chunks. Calls made
// from inside a worker run inline.
// Exceptions from workers are rethrown on the calling thread (first one wins).
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace mattefuse
