#pragma once

#include <cstddef>
#include <functional>

namespace entrobridge {

// Thread budget for per-atom work: value of ENTROBRIDGE_THREADS, where 0 or an
// unset variable means hardware concurrency.
std::size_t thread_budget();

// Runs fn(i) for i in [0, n). Work is split across threads when the budget and
// the range justify it; each call is independent and results do not depend on
// the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace entrobridge
