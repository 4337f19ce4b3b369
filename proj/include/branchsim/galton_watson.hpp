#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "branchsim/integer_distribution.hpp"
#include "branchsim/monte_carlo.hpp"
#include "branchsim/rng.hpp"

namespace branchsim {

// Offspring law together with its fertility (mean offspring count).
// When the law is Binomial(n, p) the parameters are kept so population
// steps can draw one Binomial(n * pop, p) variate instead of pop single
// draws.
struct OffspringLaw {
  IntegerDistribution dist;
  double fertility = 0.0;
  std::optional<std::pair<std::int64_t, double>> binomial_params;

  static OffspringLaw from_binomial(std::int64_t n, double p);
  static OffspringLaw from_dist(IntegerDistribution d);

  // Checks dist validity, nonnegative support and that fertility matches
  // the stored mean to 1e-10.
  void validate() const;
};

enum class GWStatus { Extinct, Survived, Exploded };

struct GWOutcome {
  GWStatus status = GWStatus::Survived;
  // Extinct: first step with population 0.  Exploded: first step at or
  // above the threshold.  Survived: the horizon.
  std::int64_t step = 0;
  std::int64_t final_population = 0;
  std::vector<std::int64_t> trajectory;  // filled only when requested
};

// A block size / block time pair at which the renormalized chain was
// verified supercritical: value > threshold.
struct Certificate {
  std::int64_t block_size = 0;
  std::int64_t block_time = 0;
  double value = 0.0;
  double threshold = 0.0;
};

// Budget for exact distribution evolution.  A step costs quadratic work
// in the support, so the cap also bounds per-step time: 1<<16 keeps the
// worst admissible step around a second.
struct DpBudget {
  std::int64_t max_support = 1 << 16;
  double trunc_eps = kDefaultTruncEps;
};

struct SurvivalBound {
  double bound = 0.0;           // partial product lower bound
  double c = 0.0;               // Var(X ^ M) / (E[X ^ M] - a)
  double truncated_mean = 0.0;  // E[X ^ M]
};

// One synchronous generation: the sum of `population` independent
// offspring counts.
std::int64_t gw_step(std::int64_t population, const OffspringLaw& law,
                     Rng& rng);

// Runs the chain from `initial` until extinction, explosion at
// `explosion_threshold`, or `horizon` steps.
GWOutcome simulate(std::int64_t initial, const OffspringLaw& law,
                   std::int64_t horizon, std::int64_t explosion_threshold,
                   Rng& rng, bool record_trajectory = false);

// Exact law of the population after `steps` generations started from
// `initial` individuals, by repeated compound steps.  Throws
// BudgetExceeded when a step would outgrow budget.max_support.
IntegerDistribution exact_law_at(std::int64_t initial,
                                 const OffspringLaw& law, std::int64_t steps,
                                 const DpBudget& budget = {});

// P(population hits 0 eventually) for one initial individual: the least
// fixed point of the offspring pgf, found by iterating s <- pgf(s) from
// 0 until successive iterates differ by less than tol.  Throws
// IterationCapExceeded past max_iterations.
double extinction_probability(const OffspringLaw& law, double tol,
                              std::int64_t max_iterations = 1000000,
                              std::int64_t* iterations_out = nullptr);

// P(population still alive after n steps), exactly.
double tau_tail_exact(std::int64_t initial, const OffspringLaw& law,
                      std::int64_t n, const DpBudget& budget = {});

// a * P(block of `block_size` produces at least ceil(a * block_size)
// children in one generation): the fertility of the renormalized chain
// at scale factor a.  The integer ceiling is the conservative direction.
double renormalized_fertility(const OffspringLaw& law, double a,
                              std::int64_t block_size);

// Scans block times T = 1..t_max (outer) and block sizes N = 1..n_max
// (inner) for the first pair with P(pop at T >= 2N | pop 0 = N) > 1/2.
std::optional<Certificate> certificate_search(const OffspringLaw& law,
                                              std::int64_t n_max,
                                              std::int64_t t_max,
                                              const DpBudget& budget = {});

// Lower bound on survival of the chain started from `initial` blocks,
// via the partial product prod_{i=0}^{terms} (1 - c / (initial * a^i))
// with c = Var(X ^ trunc_level) / (E[X ^ trunc_level] - a).  Requires
// a > 1, E[X ^ trunc_level] > a and initial > c.
SurvivalBound survival_lower_bound(const OffspringLaw& law, double a,
                                   std::int64_t trunc_level,
                                   std::int64_t initial, std::int64_t terms);

// Offspring law of the chain where each whole brood is kept with
// probability p and replaced by 0 otherwise: fertility drops to
// p * fertility.
OffspringLaw thin(const OffspringLaw& law, double p);

// Monte Carlo survival proxy: fraction of runs that reach
// explosion_threshold before dying, within horizon steps.  Trial t draws
// from derive_stream(seed, 0, 0, t), so the estimate is independent of
// the number of jobs.
SurvivalEstimate gw_survival_mc(const OffspringLaw& law, std::int64_t initial,
                                std::int64_t trials, std::int64_t horizon,
                                std::int64_t explosion_threshold,
                                std::uint64_t seed, int jobs = 1);

}  // namespace branchsim
