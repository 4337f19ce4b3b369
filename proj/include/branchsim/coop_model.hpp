#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "branchsim/galton_watson.hpp"
#include "branchsim/integer_distribution.hpp"
#include "branchsim/monte_carlo.hpp"
#include "branchsim/rng.hpp"

namespace branchsim {

// Two-species chain: type-1 count follows Binomial(2(x+y), q), type-2
// Binomial(2 min(x,y), p), independently given the current state.
struct CoopParams {
  double p = 0.0;
  double q = 0.0;

  // The model is studied for p, q strictly inside (0,1); the endpoints
  // are still well-defined degenerate binomials and are accepted for
  // analytic evaluation and for sweeps that include the boundary.
  void validate() const;
};

struct CoopState {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z() const { return x < y ? x : y; }
};

struct JointEntry {
  std::int64_t x = 0;
  std::int64_t y = 0;
  double prob = 0.0;
};

// Sparse joint law of (X, Y), entries sorted by (x, y).  Mass dropped by
// support caps or tail trimming accumulates in truncation_loss; stored
// probabilities are exact lower bounds.
class JointLaw {
 public:
  JointLaw() : entries_{{0, 0, 1.0}} {}
  static JointLaw from_entries(std::vector<JointEntry> entries, double loss);

  const std::vector<JointEntry>& entries() const { return entries_; }
  double truncation_loss() const { return truncation_loss_; }
  double total_mass() const;
  double pmf(std::int64_t x, std::int64_t y) const;
  // P(min(X, Y) >= k) over stored mass.
  double tail_min(std::int64_t k) const;
  double expected_floor_min(std::int64_t n) const;

  IntegerDistribution marginal_x() const;
  IntegerDistribution marginal_y() const;
  // Law of floor(min(X, Y) / n); truncation loss carries over.
  IntegerDistribution floor_min_over(std::int64_t n) const;

  bool is_valid(double tol = 1e-9) const;

 private:
  std::vector<JointEntry> entries_;
  double truncation_loss_ = 0.0;
};

// Budget for the exact joint DP.  States whose coordinate sum exceeds
// max_sum are truncated into loss (the support roughly quadruples per
// step); exceeding max_steps, max_states, or the per-step work cap is
// an error.
struct JointBudget {
  std::int64_t max_sum = 2048;
  std::int64_t max_steps = 6;
  std::int64_t max_states = 2000000;
  // A step costs one multiply per (cell, row, column) triple plus a
  // dense-grid scan; the estimate is checked before any work is done.
  std::int64_t max_step_ops = std::int64_t{1} << 32;
  double trunc_eps = kDefaultTruncEps;
};

struct ValueWithError {
  double value = 0.0;
  double error_bar = 0.0;
};

struct McMethod {
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
};

CoopState coop_step(const CoopState& state, const CoopParams& params,
                    Rng& rng);

// E[min(U, V)] for independent U ~ Binomial(4, q), V ~ Binomial(2, p):
// the expected next-step minimum from (1,1), enumerated over all 64
// outcomes of the six underlying Bernoulli bits.
double h_exact(const CoopParams& params);

// The same quantity as the expanded eight-monomial polynomial.
double h_polynomial(const CoopParams& params);

// Exact law of (X_T, Y_T) started from `initial`.
JointLaw exact_joint_law_from(const CoopState& initial, std::int64_t steps,
                              const CoopParams& params,
                              const JointBudget& budget = {});

// Exact law of (X_T, Y_T) started from (N, N).
JointLaw exact_joint_law(std::int64_t block_size, std::int64_t steps,
                         const CoopParams& params,
                         const JointBudget& budget = {});

// E[floor(min(X_T, Y_T) / N)] from (N, N).  Exact mode bounds the
// truncation error (reachable minima grow at most 3x per step); the
// Monte Carlo variant returns the sample mean and its standard error.
// stream_a/stream_b address the RNG substream (see derive_stream).
ValueWithError expected_renormalized_z(std::int64_t block_size,
                                       std::int64_t steps,
                                       const CoopParams& params,
                                       const JointBudget& budget = {});
ValueWithError expected_renormalized_z_mc(std::int64_t block_size,
                                          std::int64_t steps,
                                          const CoopParams& params,
                                          std::int64_t trials,
                                          std::uint64_t seed,
                                          std::uint64_t stream_a = 0,
                                          std::uint64_t stream_b = 0,
                                          int jobs = 1);

// Scans block times T = 1..t_max (outer) and sizes N = 1..n_max (inner)
// for the first pair with E[floor(Z_T/N)] exceeding 1 by more than its
// error bar, so noise can never mint a false certificate.  Exact DP by
// default, Monte Carlo when `mc` is given.  In exact mode a scan past
// budget.max_steps throws only after the budgeted steps found nothing.
std::optional<Certificate> coop_certificate_search(
    const CoopParams& params, std::int64_t n_max, std::int64_t t_max,
    const JointBudget& budget = {},
    const std::optional<McMethod>& mc = std::nullopt);

// Fraction of runs from (1,1) in which either count reaches
// explosion_threshold before one dies: an upper-biased proxy for
// survival forever.  Trial t draws from derive_stream(seed, 0, 0, t).
SurvivalEstimate coop_survival_mc(const CoopParams& params,
                                  std::int64_t trials,
                                  std::int64_t explosion_threshold,
                                  std::uint64_t seed, int jobs = 1);

// The q at which h(p, .) crosses 1, by bisection on [0, 1] down to
// bracket width tol.  Requires h(p, 1) = 2p > 1, else no crossing.
double critical_q(double p, double tol = 1e-12);

// One-step kernel domination behind super-additivity: starting from
// s1 + s2 the first coordinate has the same law as the sum of the two
// independent first coordinates, and the second stochastically
// dominates the sum of the two independent second coordinates
// (Binomial CDF comparison with slack 1e-12).
bool domination_check(const CoopState& s1, const CoopState& s2,
                      const CoopParams& params);

// Block comparison: with a = min(floor(x/N), floor(y/N)) and gamma the
// law of floor(Z_T/N) from (N,N), checks
// P^{(x,y)}(Z_T >= k N) >= gamma^{*a}([k, inf)) - 1e-9.
bool grandpas_check(std::int64_t x, std::int64_t y, std::int64_t k,
                    std::int64_t block_size, std::int64_t steps,
                    const CoopParams& params, const JointBudget& budget = {});

}  // namespace branchsim
