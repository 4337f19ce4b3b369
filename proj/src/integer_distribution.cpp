#include "branchsim/integer_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "branchsim/errors.hpp"

namespace branchsim {

IntegerDistribution IntegerDistribution::delta(std::int64_t v) {
  IntegerDistribution d;
  d.min_ = v;
  d.probs_ = {1.0};
  return d;
}

IntegerDistribution IntegerDistribution::from_pmf(
    const std::vector<std::pair<std::int64_t, double>>& entries,
    double truncation_loss) {
  if (entries.empty())
    throw std::invalid_argument("from_pmf: empty entry list");
  std::int64_t lo = entries.front().first, hi = entries.front().first;
  for (const auto& [v, p] : entries) {
    if (p < 0.0)
      throw std::invalid_argument("from_pmf: negative probability");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  IntegerDistribution d;
  d.min_ = lo;
  d.probs_.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (const auto& [v, p] : entries) {
    double& slot = d.probs_[static_cast<std::size_t>(v - lo)];
    if (slot != 0.0)
      throw std::invalid_argument("from_pmf: duplicate value " +
                                  std::to_string(v));
    slot = p;
  }
  d.truncation_loss_ = truncation_loss;
  return d;
}

double IntegerDistribution::pmf(std::int64_t v) const {
  if (v < min_ || v > max_value()) return 0.0;
  return probs_[static_cast<std::size_t>(v - min_)];
}

double IntegerDistribution::tail(std::int64_t k) const {
  // Summed from the top end where entries are smallest.
  double t = 0.0;
  const std::int64_t lo = std::max(k, min_);
  for (std::int64_t v = max_value(); v >= lo; --v)
    t += probs_[static_cast<std::size_t>(v - min_)];
  return t;
}

double IntegerDistribution::total_mass() const {
  double t = 0.0;
  for (double p : probs_) t += p;
  return t;
}

double IntegerDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i)
    m += probs_[i] * static_cast<double>(min_ + static_cast<std::int64_t>(i));
  return m;
}

double IntegerDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double d = static_cast<double>(min_ + static_cast<std::int64_t>(i)) - m;
    v += probs_[i] * d * d;
  }
  return v;
}

bool IntegerDistribution::is_valid(double tol) const {
  if (probs_.empty() || truncation_loss_ < 0.0) return false;
  for (double p : probs_)
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
  return std::abs(total_mass() + truncation_loss_ - 1.0) <= tol;
}

void IntegerDistribution::validate(double tol) const {
  if (!is_valid(tol))
    throw std::invalid_argument(
        "IntegerDistribution: stored mass plus truncation loss is not 1");
}

IntegerDistribution IntegerDistribution::truncated_at(std::int64_t cap) const {
  IntegerDistribution d;
  d.truncation_loss_ = truncation_loss_;
  if (cap <= min_) {
    d.min_ = cap;
    d.probs_ = {total_mass()};
    return d;
  }
  if (cap >= max_value()) return *this;
  d.min_ = min_;
  const std::size_t keep = static_cast<std::size_t>(cap - min_ + 1);
  d.probs_.assign(probs_.begin(), probs_.begin() + keep);
  d.probs_.back() = tail(cap);
  return d;
}

void IntegerDistribution::trim(double mass_budget) {
  std::size_t lo = 0, hi = probs_.size();
  double dropped = 0.0;
  auto droppable = [&](double p) {
    return p < kGuardEps || dropped + p <= mass_budget;
  };
  while (hi - lo > 1) {
    const double front = probs_[lo], back = probs_[hi - 1];
    if (front <= back) {
      if (!droppable(front)) {
        if (!droppable(back)) break;
        dropped += back;
        --hi;
      } else {
        dropped += front;
        ++lo;
      }
    } else {
      if (!droppable(back)) {
        if (!droppable(front)) break;
        dropped += front;
        ++lo;
      } else {
        dropped += back;
        --hi;
      }
    }
  }
  if (lo > 0 || hi < probs_.size()) {
    probs_ = std::vector<double>(probs_.begin() + static_cast<std::ptrdiff_t>(lo),
                                 probs_.begin() + static_cast<std::ptrdiff_t>(hi));
    min_ += static_cast<std::int64_t>(lo);
    truncation_loss_ += dropped;
  }
}

IntegerDistribution binomial(std::int64_t n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw std::domain_error("binomial: need n >= 0 and p in [0, 1]");
  if (n == 0 || p == 0.0) return IntegerDistribution::delta(0);
  if (p == 1.0) return IntegerDistribution::delta(n);

  std::vector<std::pair<std::int64_t, double>> entries;
  entries.reserve(static_cast<std::size_t>(n + 1));
  if (n <= 50) {
    double coeff = 1.0;  // C(n, k), integer-exact in this range
    for (std::int64_t k = 0; k <= n; ++k) {
      entries.emplace_back(
          k, coeff * std::pow(p, static_cast<double>(k)) *
                 std::pow(1.0 - p, static_cast<double>(n - k)));
      coeff = coeff * static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
  } else {
    const double lp = std::log(p), lq = std::log1p(-p);
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::int64_t k = 0; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      const double lf = lgn - std::lgamma(kd + 1.0) -
                        std::lgamma(static_cast<double>(n - k) + 1.0) +
                        kd * lp + static_cast<double>(n - k) * lq;
      entries.emplace_back(k, std::exp(lf));
    }
  }
  auto d = IntegerDistribution::from_pmf(entries);
  d.trim(0.0);  // sub-guard ends only
  return d;
}

IntegerDistribution convolve(const IntegerDistribution& a,
                             const IntegerDistribution& b, double trunc_eps) {
  const auto& pa = a.probs();
  const auto& pb = b.probs();
  std::vector<double> out(pa.size() + pb.size() - 1, 0.0);
  // Iterate the shorter operand on the outside for cache locality.
  if (pa.size() <= pb.size()) {
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double w = pa[i];
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < pb.size(); ++j) out[i + j] += w * pb[j];
    }
  } else {
    for (std::size_t j = 0; j < pb.size(); ++j) {
      const double w = pb[j];
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < pa.size(); ++i) out[i + j] += w * pa[i];
    }
  }
  std::vector<std::pair<std::int64_t, double>> entries;
  entries.reserve(out.size());
  const std::int64_t base = a.min_value() + b.min_value();
  for (std::size_t i = 0; i < out.size(); ++i)
    entries.emplace_back(base + static_cast<std::int64_t>(i), out[i]);
  auto d = IntegerDistribution::from_pmf(
      entries, a.truncation_loss() + b.truncation_loss() -
                   a.truncation_loss() * b.truncation_loss());
  d.trim(trunc_eps);
  return d;
}

IntegerDistribution convolve_power(const IntegerDistribution& d,
                                   std::int64_t k, double trunc_eps) {
  if (k < 0) throw std::domain_error("convolve_power: need k >= 0");
  IntegerDistribution acc = IntegerDistribution::delta(0);
  IntegerDistribution sq = d;
  bool acc_used = false;
  while (k > 0) {
    if (k & 1) {
      acc = acc_used ? convolve(acc, sq, 0.0) : sq;
      acc_used = true;
    }
    k >>= 1;
    if (k > 0) sq = convolve(sq, sq, 0.0);
  }
  acc.trim(trunc_eps);
  if (!acc_used) return acc;  // k was 0
  // Same mass-conservation argument as in compound().
  std::vector<std::pair<std::int64_t, double>> entries;
  entries.reserve(acc.support_size());
  for (std::size_t j = 0; j < acc.probs().size(); ++j)
    entries.emplace_back(acc.min_value() + static_cast<std::int64_t>(j),
                         acc.probs()[j]);
  return IntegerDistribution::from_pmf(entries,
                                       std::max(0.0, 1.0 - acc.total_mass()));
}

IntegerDistribution compound(const IntegerDistribution& counts,
                             const IntegerDistribution& step,
                             double trunc_eps, std::int64_t max_support) {
  if (counts.min_value() < 0)
    throw std::domain_error("compound: counts must be nonnegative");
  const auto check_cap = [max_support](const IntegerDistribution& d) {
    if (max_support >= 0 &&
        static_cast<std::int64_t>(d.support_size()) > max_support)
      throw BudgetExceeded("compound: working support " +
                               std::to_string(d.support_size()) +
                               " exceeds cap " + std::to_string(max_support),
                           -1);
  };
  // Horner over the counts pmf: c_min + step * (c_{min+1} + step * (...)),
  // then one final convolution with step^{*min}.
  const std::int64_t lo = counts.min_value(), hi = counts.max_value();
  IntegerDistribution acc = IntegerDistribution::delta(0);
  {
    // Scale delta(0) by the top coefficient via from_pmf.
    std::vector<std::pair<std::int64_t, double>> top{{0, counts.pmf(hi)}};
    acc = IntegerDistribution::from_pmf(top, 0.0);
  }
  for (std::int64_t i = hi - 1; i >= lo; --i) {
    acc = convolve(acc, step, 0.0);
    check_cap(acc);
    const double ci = counts.pmf(i);
    if (ci != 0.0) {
      std::vector<std::pair<std::int64_t, double>> entries;
      entries.reserve(acc.support_size() + 1);
      bool merged = false;
      for (std::size_t j = 0; j < acc.probs().size(); ++j) {
        const std::int64_t v =
            acc.min_value() + static_cast<std::int64_t>(j);
        double pr = acc.probs()[j];
        if (v == 0) {
          pr += ci;
          merged = true;
        }
        entries.emplace_back(v, pr);
      }
      if (!merged) entries.emplace_back(0, ci);
      acc = IntegerDistribution::from_pmf(entries, acc.truncation_loss());
    }
  }
  if (lo > 0) {
    acc = convolve(acc, convolve_power(step, lo, 0.0), 0.0);
    check_cap(acc);
  }
  acc.trim(trunc_eps);
  // Mass is conserved through the Horner scheme except for what the trims
  // dropped and what counts/step had already lost, so the deficit from 1
  // is exactly the accumulated truncation loss.
  std::vector<std::pair<std::int64_t, double>> entries;
  entries.reserve(acc.support_size());
  for (std::size_t j = 0; j < acc.probs().size(); ++j)
    entries.emplace_back(acc.min_value() + static_cast<std::int64_t>(j),
                         acc.probs()[j]);
  auto d = IntegerDistribution::from_pmf(
      entries, std::max(0.0, 1.0 - acc.total_mass()));
  return d;
}

double pgf(const IntegerDistribution& d, double s) {
  double f = 0.0;
  const auto& probs = d.probs();
  for (std::size_t i = probs.size(); i-- > 0;) f = f * s + probs[i];
  if (d.min_value() != 0)
    f *= std::pow(s, static_cast<double>(d.min_value()));
  return f;
}

std::int64_t sample(const IntegerDistribution& d, Rng& rng) {
  const double u = rng.next_unit() * d.total_mass();
  double cum = 0.0;
  const auto& probs = d.probs();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return d.min_value() + static_cast<std::int64_t>(i);
  }
  return d.max_value();
}

}  // namespace branchsim
