#include "branchsim/coop_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "branchsim/errors.hpp"

namespace branchsim {

void CoopParams::validate() const {
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
    throw std::domain_error("CoopParams: need p, q in [0, 1]");
}

JointLaw JointLaw::from_entries(std::vector<JointEntry> entries, double loss) {
  if (loss < 0.0)
    throw std::invalid_argument("JointLaw: negative truncation loss");
  for (const auto& e : entries)
    if (e.prob < 0.0 || e.x < 0 || e.y < 0)
      throw std::invalid_argument("JointLaw: negative entry");
  std::sort(entries.begin(), entries.end(),
            [](const JointEntry& a, const JointEntry& b) {
              return a.x != b.x ? a.x < b.x : a.y < b.y;
            });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i - 1].x == entries[i].x && entries[i - 1].y == entries[i].y)
      throw std::invalid_argument("JointLaw: duplicate state");
  JointLaw law;
  law.entries_ = std::move(entries);
  law.truncation_loss_ = loss;
  return law;
}

double JointLaw::total_mass() const {
  double t = 0.0;
  for (const auto& e : entries_) t += e.prob;
  return t;
}

double JointLaw::pmf(std::int64_t x, std::int64_t y) const {
  const JointEntry probe{x, y, 0.0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                             [](const JointEntry& a, const JointEntry& b) {
                               return a.x != b.x ? a.x < b.x : a.y < b.y;
                             });
  if (it != entries_.end() && it->x == x && it->y == y) return it->prob;
  return 0.0;
}

double JointLaw::tail_min(std::int64_t k) const {
  double t = 0.0;
  for (const auto& e : entries_)
    if (e.x >= k && e.y >= k) t += e.prob;
  return t;
}

double JointLaw::expected_floor_min(std::int64_t n) const {
  if (n < 1) throw std::domain_error("expected_floor_min: need n >= 1");
  double t = 0.0;
  for (const auto& e : entries_)
    t += e.prob * static_cast<double>((e.x < e.y ? e.x : e.y) / n);
  return t;
}

IntegerDistribution JointLaw::marginal_x() const {
  std::map<std::int64_t, double> acc;
  for (const auto& e : entries_) acc[e.x] += e.prob;
  std::vector<std::pair<std::int64_t, double>> entries(acc.begin(), acc.end());
  if (entries.empty()) entries.push_back({0, 0.0});
  return IntegerDistribution::from_pmf(entries, truncation_loss_);
}

IntegerDistribution JointLaw::marginal_y() const {
  std::map<std::int64_t, double> acc;
  for (const auto& e : entries_) acc[e.y] += e.prob;
  std::vector<std::pair<std::int64_t, double>> entries(acc.begin(), acc.end());
  if (entries.empty()) entries.push_back({0, 0.0});
  return IntegerDistribution::from_pmf(entries, truncation_loss_);
}

IntegerDistribution JointLaw::floor_min_over(std::int64_t n) const {
  if (n < 1) throw std::domain_error("floor_min_over: need n >= 1");
  std::map<std::int64_t, double> acc;
  for (const auto& e : entries_) acc[(e.x < e.y ? e.x : e.y) / n] += e.prob;
  std::vector<std::pair<std::int64_t, double>> entries(acc.begin(), acc.end());
  if (entries.empty()) entries.push_back({0, 0.0});
  return IntegerDistribution::from_pmf(entries, truncation_loss_);
}

bool JointLaw::is_valid(double tol) const {
  if (truncation_loss_ < 0.0) return false;
  for (const auto& e : entries_)
    if (!(e.prob >= 0.0) || !std::isfinite(e.prob)) return false;
  return std::abs(total_mass() + truncation_loss_ - 1.0) <= tol;
}

CoopState coop_step(const CoopState& state, const CoopParams& params,
                    Rng& rng) {
  if (state.x < 0 || state.y < 0)
    throw std::domain_error("coop_step: negative state");
  params.validate();
  CoopState next;
  // Type 1 first, type 2 second: the draw order is part of the
  // reproducibility contract.
  next.x = sample_binomial(2 * (state.x + state.y), params.q, rng);
  next.y = sample_binomial(2 * state.z(), params.p, rng);
  return next;
}

double h_exact(const CoopParams& params) {
  params.validate();
  const double p = params.p, q = params.q;
  double ex = 0.0;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= 1; ++c)
        for (int d = 0; d <= 1; ++d)
          for (int e = 0; e <= 1; ++e)
            for (int f = 0; f <= 1; ++f) {
              const int t = a + b;          // V ~ Binomial(2, p)
              const int s = c + d + e + f;  // U ~ Binomial(4, q)
              const double pr = std::pow(p, t) * std::pow(1.0 - p, 2 - t) *
                                std::pow(q, s) * std::pow(1.0 - q, 4 - s);
              ex += static_cast<double>(std::min(s, t)) * pr;
            }
  return ex;
}

double h_polynomial(const CoopParams& params) {
  const double p = params.p, q = params.q;
  const double p2 = p * p;
  const double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
  return 4.0 * p2 * q4 - 12.0 * p2 * q3 + 12.0 * p2 * q2 - 4.0 * p2 * q -
         2.0 * p * q4 + 8.0 * p * q3 - 12.0 * p * q2 + 8.0 * p * q;
}

namespace {

// Internal DP state: cells sorted by (x, y), plus accumulated loss.
struct LiveSet {
  std::vector<JointEntry> cells;
  double loss = 0.0;
};

const IntegerDistribution& cached_binomial(
    std::unordered_map<std::int64_t, IntegerDistribution>& cache,
    std::int64_t n, double prob) {
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, binomial(n, prob)).first;
  return it->second;
}

void advance_once(LiveSet& live, const CoopParams& params,
                  const JointBudget& budget, std::int64_t step_index) {
  std::int64_t xhi = 0, yhi = 0;
  double ops = 0.0;
  for (const auto& c : live.cells) {
    xhi = std::max(xhi, 2 * (c.x + c.y));
    yhi = std::max(yhi, 2 * std::min(c.x, c.y));
    ops += (2.0 * static_cast<double>(c.x + c.y) + 1.0) *
           (2.0 * static_cast<double>(std::min(c.x, c.y)) + 1.0);
  }
  ops += (static_cast<double>(xhi) + 1.0) * (static_cast<double>(yhi) + 1.0);
  // Cells entering a step already satisfy x + y <= max_sum, so the grid
  // itself is bounded; the product accumulation is not, hence the upfront
  // work check before anything is allocated.
  if (ops > static_cast<double>(budget.max_step_ops))
    throw BudgetExceeded("joint DP step " + std::to_string(step_index) +
                             " work estimate exceeds budget " +
                             std::to_string(budget.max_step_ops),
                         step_index);
  const std::size_t width = static_cast<std::size_t>(yhi) + 1;
  std::vector<double> grid((static_cast<std::size_t>(xhi) + 1) * width, 0.0);

  std::unordered_map<std::int64_t, IntegerDistribution> qrows, prows;
  for (const auto& c : live.cells) {
    const auto& rq = cached_binomial(qrows, 2 * (c.x + c.y), params.q);
    const auto& rp = cached_binomial(prows, 2 * std::min(c.x, c.y), params.p);
    for (std::size_t i = 0; i < rq.probs().size(); ++i) {
      const double w = c.prob * rq.probs()[i];
      if (w < kGuardEps) continue;
      const std::size_t row =
          static_cast<std::size_t>(rq.min_value() + static_cast<std::int64_t>(i)) *
          width;
      const std::size_t base = static_cast<std::size_t>(rp.min_value());
      for (std::size_t j = 0; j < rp.probs().size(); ++j)
        grid[row + base + j] += w * rp.probs()[j];
    }
  }

  std::vector<JointEntry> next;
  for (std::int64_t x = 0; x <= xhi; ++x)
    for (std::int64_t y = 0; y <= yhi; ++y) {
      const double pr = grid[static_cast<std::size_t>(x) * width +
                             static_cast<std::size_t>(y)];
      if (pr == 0.0) continue;
      if (pr < kGuardEps || x + y > budget.max_sum) {
        live.loss += pr;
        continue;
      }
      next.push_back({x, y, pr});
    }

  // Spend the per-step tail budget on the least probable states.
  std::sort(next.begin(), next.end(),
            [](const JointEntry& a, const JointEntry& b) {
              if (a.prob != b.prob) return a.prob < b.prob;
              return a.x != b.x ? a.x < b.x : a.y < b.y;
            });
  double dropped = 0.0;
  std::size_t first_kept = 0;
  while (first_kept < next.size() &&
         dropped + next[first_kept].prob <= budget.trunc_eps) {
    dropped += next[first_kept].prob;
    ++first_kept;
  }
  live.loss += dropped;
  next.erase(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(first_kept));

  if (static_cast<std::int64_t>(next.size()) > budget.max_states)
    throw BudgetExceeded("joint DP state count " + std::to_string(next.size()) +
                             " exceeds budget at step " +
                             std::to_string(step_index),
                         step_index);

  std::sort(next.begin(), next.end(),
            [](const JointEntry& a, const JointEntry& b) {
              return a.x != b.x ? a.x < b.x : a.y < b.y;
            });
  live.cells = std::move(next);
}

}  // namespace

JointLaw exact_joint_law_from(const CoopState& initial, std::int64_t steps,
                              const CoopParams& params,
                              const JointBudget& budget) {
  if (initial.x < 0 || initial.y < 0 || steps < 0)
    throw std::domain_error(
        "exact_joint_law_from: need a nonnegative state and steps >= 0");
  params.validate();
  if (steps > budget.max_steps)
    throw BudgetExceeded("joint DP steps " + std::to_string(steps) +
                             " exceed budget " +
                             std::to_string(budget.max_steps),
                         budget.max_steps);
  LiveSet live;
  live.cells = {{initial.x, initial.y, 1.0}};
  if (initial.x + initial.y > budget.max_sum) {
    live.cells.clear();
    live.loss = 1.0;
  }
  for (std::int64_t t = 1; t <= steps; ++t)
    advance_once(live, params, budget, t);
  // Mass conservation: everything missing from the stored cells was
  // explicitly routed into loss, so recompute it from the deficit.
  double mass = 0.0;
  for (const auto& c : live.cells) mass += c.prob;
  return JointLaw::from_entries(std::move(live.cells),
                                std::max(0.0, 1.0 - mass));
}

JointLaw exact_joint_law(std::int64_t block_size, std::int64_t steps,
                         const CoopParams& params, const JointBudget& budget) {
  if (block_size < 0)
    throw std::domain_error("exact_joint_law: need block_size >= 0");
  return exact_joint_law_from({block_size, block_size}, steps, params, budget);
}

ValueWithError expected_renormalized_z(std::int64_t block_size,
                                       std::int64_t steps,
                                       const CoopParams& params,
                                       const JointBudget& budget) {
  if (block_size < 1)
    throw std::domain_error("expected_renormalized_z: need block_size >= 1");
  const JointLaw law = exact_joint_law(block_size, steps, params, budget);
  ValueWithError out;
  out.value = law.expected_floor_min(block_size);
  // The coordinate sum at most triples per step (x' <= 2(x+y) and
  // y' <= x+y), so floor(Z_T/N) <= 3^T and the truncated mass cannot
  // contribute more than that.
  out.error_bar = law.truncation_loss() *
                  std::pow(3.0, static_cast<double>(steps));
  return out;
}

ValueWithError expected_renormalized_z_mc(std::int64_t block_size,
                                          std::int64_t steps,
                                          const CoopParams& params,
                                          std::int64_t trials,
                                          std::uint64_t seed,
                                          std::uint64_t stream_a,
                                          std::uint64_t stream_b, int jobs) {
  if (block_size < 1 || steps < 0 || trials < 2)
    throw std::domain_error(
        "expected_renormalized_z_mc: need block_size >= 1, steps >= 0, "
        "trials >= 2");
  params.validate();
  std::vector<std::int64_t> values(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, jobs, [&](std::int64_t t) {
    Rng rng = derive_stream(seed, stream_a, stream_b,
                            static_cast<std::uint64_t>(t));
    CoopState s{block_size, block_size};
    for (std::int64_t i = 0; i < steps; ++i) s = coop_step(s, params, rng);
    values[static_cast<std::size_t>(t)] = s.z() / block_size;
  });
  // Sequential reduction keeps the result independent of job count.
  double sum = 0.0, sumsq = 0.0;
  for (const std::int64_t v : values) {
    const double vd = static_cast<double>(v);
    sum += vd;
    sumsq += vd * vd;
  }
  const double n = static_cast<double>(trials);
  ValueWithError out;
  out.value = sum / n;
  const double var = std::max(0.0, (sumsq - n * out.value * out.value) /
                                       (n - 1.0));
  out.error_bar = std::sqrt(var / n);
  return out;
}

std::optional<Certificate> coop_certificate_search(
    const CoopParams& params, std::int64_t n_max, std::int64_t t_max,
    const JointBudget& budget, const std::optional<McMethod>& mc) {
  if (n_max < 1 || t_max < 1)
    throw std::domain_error("coop_certificate_search: need bounds >= 1");
  params.validate();

  if (mc) {
    for (std::int64_t t = 1; t <= t_max; ++t)
      for (std::int64_t n = 1; n <= n_max; ++n) {
        const ValueWithError v = expected_renormalized_z_mc(
            n, t, params, mc->trials, mc->seed,
            static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t));
        if (v.value - v.error_bar > 1.0) return Certificate{n, t, v.value, 1.0};
      }
    return std::nullopt;
  }

  // One DP per block size, advanced incrementally: the live set for N
  // at time T is exactly exact_joint_law(N, T).
  std::vector<LiveSet> states(static_cast<std::size_t>(n_max));
  for (std::int64_t n = 1; n <= n_max; ++n) {
    auto& ls = states[static_cast<std::size_t>(n - 1)];
    ls.cells = {{n, n, 1.0}};
    if (2 * n > budget.max_sum) {
      ls.cells.clear();
      ls.loss = 1.0;
    }
  }
  for (std::int64_t t = 1; t <= t_max; ++t) {
    // The scan is only partial when the request outruns the step budget,
    // so a certificate inside the budget is still found and returned.
    if (t > budget.max_steps)
      throw BudgetExceeded(
          "coop_certificate_search: no certificate within the step budget " +
              std::to_string(budget.max_steps) + ", scan requested to " +
              std::to_string(t_max),
          budget.max_steps, n_max, budget.max_steps);
    for (std::int64_t n = 1; n <= n_max; ++n) {
      auto& ls = states[static_cast<std::size_t>(n - 1)];
      advance_once(ls, params, budget, t);
      double value = 0.0;
      for (const auto& c : ls.cells)
        value += c.prob * static_cast<double>(std::min(c.x, c.y) / n);
      const double err =
          ls.loss * std::pow(3.0, static_cast<double>(t));
      if (value - err > 1.0) return Certificate{n, t, value, 1.0};
    }
  }
  return std::nullopt;
}

SurvivalEstimate coop_survival_mc(const CoopParams& params,
                                  std::int64_t trials,
                                  std::int64_t explosion_threshold,
                                  std::uint64_t seed, int jobs) {
  if (trials < 1 || explosion_threshold < 2)
    throw std::domain_error(
        "coop_survival_mc: need trials >= 1 and threshold >= 2");
  params.validate();
  const std::int64_t hits =
      count_successes(trials, jobs, [&](std::int64_t t) {
        Rng rng = derive_stream(seed, 0, 0, static_cast<std::uint64_t>(t));
        CoopState s{1, 1};
        while (s.x > 0 && s.y > 0 && s.x < explosion_threshold &&
               s.y < explosion_threshold)
          s = coop_step(s, params, rng);
        return s.x > 0 && s.y > 0;
      });
  return make_survival_estimate(hits, trials, explosion_threshold, seed);
}

double critical_q(double p, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("critical_q: need tol > 0");
  if (p < 0.0 || p > 1.0)
    throw std::domain_error("critical_q: need p in [0, 1]");
  if (!(h_polynomial({p, 1.0}) > 1.0))
    throw std::domain_error(
        "critical_q: h(p, 1) = 2p <= 1, the curve h = 1 has no crossing");
  double qmin = 0.0, qmax = 1.0;
  while (qmax - qmin > tol) {
    const double mid = 0.5 * (qmin + qmax);
    if (h_polynomial({p, mid}) < 1.0)
      qmin = mid;
    else
      qmax = mid;
  }
  return 0.5 * (qmin + qmax);
}

bool domination_check(const CoopState& s1, const CoopState& s2,
                      const CoopParams& params) {
  if (s1.x < 0 || s1.y < 0 || s2.x < 0 || s2.y < 0)
    throw std::domain_error("domination_check: negative state");
  params.validate();
  // First coordinates: Binomial(2(x+y), q) trial counts must agree.
  if (2 * (s1.x + s1.y) + 2 * (s2.x + s2.y) !=
      2 * ((s1.x + s2.x) + (s1.y + s2.y)))
    return false;
  // Second coordinates: Binomial with fewer trials is dominated.
  const std::int64_t n_few = 2 * (s1.z() + s2.z());
  const std::int64_t n_more =
      2 * std::min(s1.x + s2.x, s1.y + s2.y);
  if (n_few > n_more) return false;
  const IntegerDistribution few = binomial(n_few, params.p);
  const IntegerDistribution more = binomial(n_more, params.p);
  double cdf_few = 0.0, cdf_more = 0.0;
  for (std::int64_t k = 0; k <= n_more; ++k) {
    cdf_few += few.pmf(k);
    cdf_more += more.pmf(k);
    if (cdf_few < cdf_more - 1e-12) return false;
  }
  return true;
}

bool grandpas_check(std::int64_t x, std::int64_t y, std::int64_t k,
                    std::int64_t block_size, std::int64_t steps,
                    const CoopParams& params, const JointBudget& budget) {
  if (x < 0 || y < 0 || k < 0 || block_size < 1 || steps < 0)
    throw std::domain_error("grandpas_check: bad arguments");
  const std::int64_t a = std::min(x / block_size, y / block_size);
  const double lhs =
      exact_joint_law_from({x, y}, steps, params, budget)
          .tail_min(k * block_size);
  const IntegerDistribution gamma =
      exact_joint_law(block_size, steps, params, budget)
          .floor_min_over(block_size);
  const double rhs = convolve_power(gamma, a, 0.0).tail(k);
  return lhs >= rhs - 1e-9;
}

}  // namespace branchsim
