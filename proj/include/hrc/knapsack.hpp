#pragma once

#include <span>

#include "hrc/job.hpp"

namespace hrc {

/// Capacity slack and value-tie tolerance for the fill.
inline constexpr double kFillTolerance = 1e-9;

/// Subset of `candidates` with the largest total duration not exceeding
/// `budget`, in increasing id order. `durations[i]` belongs to
/// `candidates[i]`. Equal totals resolve to the lexicographically smallest
/// id set.
TaskList knapsack_fill(const TaskList& candidates, double budget,
                       std::span<const double> durations);

}  // namespace hrc
