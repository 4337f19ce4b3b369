#include "branchsim/monte_carlo.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace branchsim {

// Phi^-1(0.995), nearest double.
static constexpr double kZ99 = 2.5758293035489004;

void wilson_ci99(std::int64_t successes, std::int64_t trials, double* low,
                 double* high) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::domain_error("wilson_ci99: need 0 <= successes <= trials");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = kZ99 * kZ99;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double half =
      kZ99 * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  double lo = (center - half) / denom;
  double hi = (center + half) / denom;
  if (lo < 0.0) lo = 0.0;
  if (hi > 1.0) hi = 1.0;
  *low = lo;
  *high = hi;
}

SurvivalEstimate make_survival_estimate(std::int64_t successes,
                                        std::int64_t trials,
                                        std::int64_t explosion_threshold,
                                        std::uint64_t seed) {
  SurvivalEstimate e;
  e.successes = successes;
  e.trials = trials;
  e.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  wilson_ci99(successes, trials, &e.ci99_low, &e.ci99_high);
  e.explosion_threshold = explosion_threshold;
  e.seed = seed;
  return e;
}

std::int64_t count_successes(std::int64_t trials, int jobs,
                             const std::function<bool(std::int64_t)>& trial) {
  if (trials <= 0) throw std::domain_error("count_successes: need trials > 0");
  if (jobs < 1) jobs = 1;
  if (jobs == 1) {
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < trials; ++t)
      if (trial(t)) ++hits;
    return hits;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> hits{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      std::int64_t local = 0;
      for (;;) {
        const std::int64_t t = next.fetch_add(1, std::memory_order_relaxed);
        if (t >= trials) break;
        if (trial(t)) ++local;
      }
      hits.fetch_add(local, std::memory_order_relaxed);
    });
  }
  for (auto& w : workers) w.join();
  return hits.load();
}

void parallel_for(std::int64_t n, int jobs,
                  const std::function<void(std::int64_t)>& body) {
  if (n <= 0) return;
  if (jobs < 1) jobs = 1;
  if (jobs == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        body(i);
      }
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace branchsim
