#pragma once

#include <mutex>

namespace topolearn::detail {

// FFTW planning is not thread safe; execution is.
std::mutex& fftw_planner_mutex();

}  // namespace topolearn::detail
