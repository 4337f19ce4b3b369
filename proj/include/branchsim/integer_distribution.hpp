#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "branchsim/rng.hpp"

namespace branchsim {

// Entries smaller than this are dropped from support ends outright.
inline constexpr double kGuardEps = 1e-300;
// Default tail-mass budget a convolution step may discard.
inline constexpr double kDefaultTruncEps = 1e-15;

// A probability distribution on a contiguous integer range, stored as a
// dense vector with an offset.  Mass removed by truncation is tracked in
// truncation_loss, never folded back into stored entries, so stored
// probabilities are exact lower bounds on the true ones.
class IntegerDistribution {
 public:
  // Point mass at 0.
  IntegerDistribution() = default;

  static IntegerDistribution delta(std::int64_t v);
  // Entries may arrive in any order; values must be distinct and probs
  // nonnegative.  Gaps inside the range are filled with zeros.
  static IntegerDistribution from_pmf(
      const std::vector<std::pair<std::int64_t, double>>& entries,
      double truncation_loss = 0.0);

  std::int64_t min_value() const { return min_; }
  std::int64_t max_value() const {
    return min_ + static_cast<std::int64_t>(probs_.size()) - 1;
  }
  std::size_t support_size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }

  double pmf(std::int64_t v) const;
  // P(X >= k) over stored mass only; discarded tail mass is reported via
  // truncation_loss and deliberately not added here.
  double tail(std::int64_t k) const;
  double truncation_loss() const { return truncation_loss_; }
  double total_mass() const;
  double mean() const;
  double variance() const;

  bool is_valid(double tol = 1e-12) const;
  void validate(double tol = 1e-12) const;  // throws std::invalid_argument

  // Law of min(X, cap).
  IntegerDistribution truncated_at(std::int64_t cap) const;

  // Drops sub-guard end entries always, then keeps dropping the smaller
  // end entry while the total dropped this call stays within mass_budget.
  // Dropped mass moves to truncation_loss.
  void trim(double mass_budget);

 private:
  std::int64_t min_ = 0;
  std::vector<double> probs_{1.0};
  double truncation_loss_ = 0.0;
};

// Binomial(n, p).  Exact-product evaluation for n <= 50 (binomial
// coefficients up to C(50,25) are integer-exact in a double), a
// log-gamma route above that.
IntegerDistribution binomial(std::int64_t n, double p);

// Law of X + Y for independent X, Y.
IntegerDistribution convolve(const IntegerDistribution& a,
                             const IntegerDistribution& b,
                             double trunc_eps = kDefaultTruncEps);

// k-fold convolution by repeated squaring; k = 0 gives delta(0).
IntegerDistribution convolve_power(const IntegerDistribution& d,
                                   std::int64_t k,
                                   double trunc_eps = kDefaultTruncEps);

// Law of sum_{i=1}^{K} X_i with K ~ counts and X_i ~ step, all
// independent: one synchronous branching step.  Evaluated as a Horner
// scheme over counts' pmf, so the work is O(K^2 S^2 / 2) for support
// sizes K and S.  The trunc_eps budget is spent once, on the result.
// max_support >= 0 caps the working support while the scheme runs; the
// accumulator crossing the cap throws BudgetExceeded before the
// quadratic work can pile up.
IntegerDistribution compound(const IntegerDistribution& counts,
                             const IntegerDistribution& step,
                             double trunc_eps = kDefaultTruncEps,
                             std::int64_t max_support = -1);

// Probability generating function E[s^X] evaluated at s in [0, 1].
double pgf(const IntegerDistribution& d, double s);

// Draws from the stored (renormalized) mass; truncated tail values are
// unreachable.  O(support_size).
std::int64_t sample(const IntegerDistribution& d, Rng& rng);

}  // namespace branchsim
