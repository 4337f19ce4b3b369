#include "branchsim/galton_watson.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "branchsim/errors.hpp"

namespace branchsim {

OffspringLaw OffspringLaw::from_binomial(std::int64_t n, double p) {
  OffspringLaw law;
  law.dist = binomial(n, p);
  law.fertility = static_cast<double>(n) * p;
  law.binomial_params = {n, p};
  return law;
}

OffspringLaw OffspringLaw::from_dist(IntegerDistribution d) {
  OffspringLaw law;
  law.fertility = d.mean();
  law.dist = std::move(d);
  return law;
}

void OffspringLaw::validate() const {
  dist.validate();
  if (dist.min_value() < 0)
    throw std::invalid_argument("OffspringLaw: negative offspring count");
  if (std::abs(fertility - dist.mean()) > 1e-10)
    throw std::invalid_argument(
        "OffspringLaw: fertility does not match the stored mean");
}

std::int64_t gw_step(std::int64_t population, const OffspringLaw& law,
                     Rng& rng) {
  if (population < 0) throw std::domain_error("gw_step: negative population");
  if (population == 0) return 0;
  if (law.binomial_params) {
    const auto [n, p] = *law.binomial_params;
    return sample_binomial(n * population, p, rng);
  }
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < population; ++i) total += sample(law.dist, rng);
  return total;
}

GWOutcome simulate(std::int64_t initial, const OffspringLaw& law,
                   std::int64_t horizon, std::int64_t explosion_threshold,
                   Rng& rng, bool record_trajectory) {
  if (initial < 0 || horizon < 1 || explosion_threshold < 1)
    throw std::domain_error(
        "simulate: need initial >= 0, horizon >= 1, threshold >= 1");
  GWOutcome out;
  std::int64_t pop = initial;
  if (record_trajectory) out.trajectory.push_back(pop);
  for (std::int64_t t = 0;; ++t) {
    if (pop == 0) {
      out.status = GWStatus::Extinct;
      out.step = t;
      out.final_population = 0;
      return out;
    }
    if (pop >= explosion_threshold) {
      out.status = GWStatus::Exploded;
      out.step = t;
      out.final_population = pop;
      return out;
    }
    if (t == horizon) {
      out.status = GWStatus::Survived;
      out.step = t;
      out.final_population = pop;
      return out;
    }
    pop = gw_step(pop, law, rng);
    if (record_trajectory) out.trajectory.push_back(pop);
  }
}

IntegerDistribution exact_law_at(std::int64_t initial,
                                 const OffspringLaw& law, std::int64_t steps,
                                 const DpBudget& budget) {
  if (initial < 0 || steps < 0)
    throw std::domain_error("exact_law_at: need initial >= 0 and steps >= 0");
  IntegerDistribution d = IntegerDistribution::delta(initial);
  for (std::int64_t t = 1; t <= steps; ++t) {
    try {
      d = compound(d, law.dist, budget.trunc_eps, budget.max_support);
    } catch (const BudgetExceeded&) {
      throw BudgetExceeded("exact_law_at: support exceeds budget " +
                               std::to_string(budget.max_support) +
                               " at step " + std::to_string(t),
                           t);
    }
  }
  return d;
}

double extinction_probability(const OffspringLaw& law, double tol,
                              std::int64_t max_iterations,
                              std::int64_t* iterations_out) {
  if (!(tol > 0.0))
    throw std::domain_error("extinction_probability: need tol > 0");
  double s = 0.0;
  for (std::int64_t it = 1; it <= max_iterations; ++it) {
    const double fs = pgf(law.dist, s);
    if (std::abs(fs - s) < tol) {
      if (iterations_out) *iterations_out = it;
      return fs;
    }
    s = fs;
  }
  throw IterationCapExceeded(
      "extinction_probability: no convergence within " +
      std::to_string(max_iterations) + " iterations (tol " +
      std::to_string(tol) + ")");
}

double tau_tail_exact(std::int64_t initial, const OffspringLaw& law,
                      std::int64_t n, const DpBudget& budget) {
  const IntegerDistribution d = exact_law_at(initial, law, n, budget);
  // Truncated mass sits on positive values, so it belongs to the tail;
  // adding it keeps the result an upper bound that is exact whenever the
  // DP lost nothing.
  return 1.0 - d.pmf(0);
}

double renormalized_fertility(const OffspringLaw& law, double a,
                              std::int64_t block_size) {
  if (!(a > 0.0) || block_size < 1)
    throw std::domain_error(
        "renormalized_fertility: need a > 0 and block_size >= 1");
  const std::int64_t target = static_cast<std::int64_t>(
      std::ceil(a * static_cast<double>(block_size)));
  IntegerDistribution block_law;
  if (law.binomial_params) {
    const auto [n, p] = *law.binomial_params;
    block_law = binomial(n * block_size, p);
  } else {
    block_law = convolve_power(law.dist, block_size);
  }
  return a * block_law.tail(target);
}

std::optional<Certificate> certificate_search(const OffspringLaw& law,
                                              std::int64_t n_max,
                                              std::int64_t t_max,
                                              const DpBudget& budget) {
  if (n_max < 1 || t_max < 1)
    throw std::domain_error("certificate_search: need n_max, t_max >= 1");
  // Block time is the outer loop so the first hit is minimal in T, then
  // in N.  Laws are advanced incrementally: the state for block size N
  // at time T is exactly exact_law_at(N, law, T).
  std::vector<IntegerDistribution> cur;
  cur.reserve(static_cast<std::size_t>(n_max));
  for (std::int64_t n = 1; n <= n_max; ++n)
    cur.push_back(IntegerDistribution::delta(n));
  for (std::int64_t t = 1; t <= t_max; ++t) {
    for (std::int64_t n = 1; n <= n_max; ++n) {
      auto& d = cur[static_cast<std::size_t>(n - 1)];
      try {
        d = compound(d, law.dist, budget.trunc_eps, budget.max_support);
      } catch (const BudgetExceeded&) {
        throw BudgetExceeded("certificate_search: support exceeds budget", t,
                             n, t);
      }
      const double v = d.tail(2 * n);
      if (v > 0.5) return Certificate{n, t, v, 0.5};
    }
  }
  return std::nullopt;
}

SurvivalBound survival_lower_bound(const OffspringLaw& law, double a,
                                   std::int64_t trunc_level,
                                   std::int64_t initial, std::int64_t terms) {
  if (!(a > 1.0))
    throw std::domain_error("survival_lower_bound: need a > 1");
  if (trunc_level < 1 || initial < 1 || terms < 0)
    throw std::domain_error(
        "survival_lower_bound: need trunc_level, initial >= 1 and terms >= 0");
  const IntegerDistribution capped = law.dist.truncated_at(trunc_level);
  SurvivalBound out;
  out.truncated_mean = capped.mean();
  if (!(out.truncated_mean > a))
    throw std::domain_error(
        "survival_lower_bound: truncated mean " +
        std::to_string(out.truncated_mean) + " does not exceed a");
  out.c = capped.variance() / (out.truncated_mean - a);
  if (!(static_cast<double>(initial) > out.c))
    throw std::domain_error(
        "survival_lower_bound: initial population must exceed c = " +
        std::to_string(out.c));
  double prod = 1.0;
  for (std::int64_t i = 0; i <= terms; ++i) {
    prod *= 1.0 - out.c / (static_cast<double>(initial) *
                           std::pow(a, static_cast<double>(i)));
  }
  out.bound = std::min(1.0, std::max(0.0, prod));
  return out;
}

OffspringLaw thin(const OffspringLaw& law, double p) {
  if (p < 0.0 || p > 1.0)
    throw std::domain_error("thin: need p in [0, 1]");
  if (p == 1.0) return law;
  // B*X with one Bernoulli(p) per brood: the whole litter is kept or
  // dropped, so the law is the mixture (1-p) delta_0 + p nu.
  const std::int64_t lo = law.dist.min_value(), hi = law.dist.max_value();
  if (lo < 0) throw std::domain_error("thin: negative offspring count");
  std::vector<std::pair<std::int64_t, double>> entries;
  entries.reserve(static_cast<std::size_t>(hi + 1));
  for (std::int64_t k = 0; k <= hi; ++k) {
    double pr = p * law.dist.pmf(k);
    if (k == 0) pr += 1.0 - p;
    entries.emplace_back(k, pr);
  }
  auto d = IntegerDistribution::from_pmf(entries,
                                         p * law.dist.truncation_loss());
  d.trim(0.0);
  OffspringLaw out = OffspringLaw::from_dist(std::move(d));
  out.fertility = p * law.fertility;
  return out;
}

SurvivalEstimate gw_survival_mc(const OffspringLaw& law, std::int64_t initial,
                                std::int64_t trials, std::int64_t horizon,
                                std::int64_t explosion_threshold,
                                std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::domain_error("gw_survival_mc: need trials >= 1");
  const std::int64_t hits = count_successes(
      trials, jobs, [&](std::int64_t t) {
        Rng rng = derive_stream(seed, 0, 0, static_cast<std::uint64_t>(t));
        const GWOutcome out =
            simulate(initial, law, horizon, explosion_threshold, rng);
        return out.status == GWStatus::Exploded;
      });
  return make_survival_estimate(hits, trials, explosion_threshold, seed);
}

}  // namespace branchsim
