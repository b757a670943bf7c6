#pragma once

#include <functional>

namespace gridsoc {

// Runs body(0..count-1) across up to `jobs` worker threads (jobs <= 1 or
// count <= 1 degrades to a plain loop). The first exception thrown by any
// body is rethrown after all workers join.
void parallel_for(int count, int jobs, const std::function<void(int)>& body);

int hardware_jobs();

}  // namespace gridsoc
