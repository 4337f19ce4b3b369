#pragma once

#include <cstdint>
#include <functional>

namespace branchsim {

struct SurvivalEstimate {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double estimate = 0.0;
  double ci99_low = 0.0;   // Wilson score interval, 99% level
  double ci99_high = 0.0;
  std::int64_t explosion_threshold = 0;
  std::uint64_t seed = 0;
};

// Wilson score interval at the 99% level (z = Phi^-1(0.995)).
void wilson_ci99(std::int64_t successes, std::int64_t trials, double* low,
                 double* high);

SurvivalEstimate make_survival_estimate(std::int64_t successes,
                                        std::int64_t trials,
                                        std::int64_t explosion_threshold,
                                        std::uint64_t seed);

// Counts trials for which `trial(index)` returns true, splitting the
// index range over `jobs` threads.  The count is a sum of indicator
// values, so the result does not depend on the split.
std::int64_t count_successes(std::int64_t trials, int jobs,
                             const std::function<bool(std::int64_t)>& trial);

// Parallel for over [0, n): each worker pulls the next index from a
// shared counter.  Results must be written to per-index slots.
void parallel_for(std::int64_t n, int jobs,
                  const std::function<void(std::int64_t)>& body);

}  // namespace branchsim
