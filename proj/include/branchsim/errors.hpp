#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace branchsim {

// Thrown when an exact DP would exceed its configured support/step budget.
// Carries the frontier that was reached so callers can report partial scans.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::int64_t step_reached,
                 std::int64_t block_size = -1, std::int64_t block_time = -1)
      : std::runtime_error(what),
        step_reached(step_reached),
        block_size(block_size),
        block_time(block_time) {}

  std::int64_t step_reached;
  std::int64_t block_size;  // -1 when not inside an (N,T) scan
  std::int64_t block_time;
};

// Fixed-point or root iteration failed to converge within its iteration cap.
class IterationCapExceeded : public std::runtime_error {
 public:
  explicit IterationCapExceeded(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace branchsim
