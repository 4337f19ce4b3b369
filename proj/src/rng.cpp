#include "branchsim/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace branchsim {
namespace {

// Inversion by sequential search from k = 0.  Requires n*r small; the
// expected number of steps is n*r + 1.
std::int64_t binv(std::int64_t n, double r, Rng& rng) {
  const double q = 1.0 - r;
  const double s = r / q;
  const double a = static_cast<double>(n + 1) * s;
  const double f0 = std::exp(static_cast<double>(n) * std::log1p(-r));
  for (;;) {
    double f = f0;
    double u = rng.next_unit();
    for (std::int64_t k = 0; k <= n; ++k) {
      if (u < f) return k;
      u -= f;
      f *= (a / static_cast<double>(k + 1) - s);
    }
    // Falls through only when rounding in the partial sums left u above
    // the accumulated total mass; redraw.
  }
}

// BTPE rejection sampler (triangle + parallelogram + two exponential
// tails around the mode).  Requires r <= 1/2 and n*r >= 30.
std::int64_t btpe(std::int64_t n, double r, Rng& rng) {
  const double nd = static_cast<double>(n);
  const double q = 1.0 - r;
  const double fm = nd * r + r;
  const std::int64_t m = static_cast<std::int64_t>(std::floor(fm));
  const double nrq = nd * r * q;
  const double p1 = std::floor(2.195 * std::sqrt(nrq) - 4.6 * q) + 0.5;
  const double xm = static_cast<double>(m) + 0.5;
  const double xl = xm - p1;
  const double xr = xm + p1;
  const double c = 0.134 + 20.5 / (15.3 + static_cast<double>(m));
  double al = (fm - xl) / (fm - xl * r);
  const double laml = al * (1.0 + 0.5 * al);
  al = (xr - fm) / (xr * q);
  const double lamr = al * (1.0 + 0.5 * al);
  const double p2 = p1 * (1.0 + 2.0 * c);
  const double p3 = p2 + c / laml;
  const double p4 = p3 + c / lamr;

  for (;;) {
    const double u = rng.next_unit() * p4;
    double v = rng.next_unit();
    std::int64_t y;
    if (u <= p1) {
      return static_cast<std::int64_t>(std::floor(xm - p1 * v + u));
    } else if (u <= p2) {
      const double x = xl + (u - p1) / c;
      v = v * c + 1.0 - std::abs(x - xm) / p1;
      if (v > 1.0 || v <= 0.0) continue;
      y = static_cast<std::int64_t>(std::floor(x));
    } else if (u <= p3) {
      y = static_cast<std::int64_t>(std::floor(xl + std::log(v) / laml));
      if (y < 0) continue;
      v = v * (u - p2) * laml;
    } else {
      y = static_cast<std::int64_t>(std::floor(xr - std::log(v) / lamr));
      if (y > n) continue;
      v = v * (u - p3) * lamr;
    }

    // Accept y iff v <= f(y)/f(m).
    const std::int64_t k = std::llabs(y - m);
    if (k <= 20 || static_cast<double>(k) >= nrq / 2.0 - 1.0) {
      const double s = r / q;
      const double aa = s * (nd + 1.0);
      double f = 1.0;
      if (m < y) {
        for (std::int64_t i = m + 1; i <= y; ++i)
          f *= (aa / static_cast<double>(i) - s);
      } else if (m > y) {
        for (std::int64_t i = y + 1; i <= m; ++i)
          f /= (aa / static_cast<double>(i) - s);
      }
      if (v <= f) return y;
    } else {
      // Squeeze on log f(y)/f(m), then the full Stirling-corrected test.
      const double kd = static_cast<double>(k);
      const double amaxp =
          (kd / nrq) * ((kd * (kd / 3.0 + 0.625) + 1.0 / 6.0) / nrq + 0.5);
      const double ynorm = -kd * kd / (2.0 * nrq);
      const double alv = std::log(v);
      if (alv < ynorm - amaxp) return y;
      if (alv <= ynorm + amaxp) {
        const double x1 = static_cast<double>(y + 1);
        const double f1 = static_cast<double>(m + 1);
        const double z = static_cast<double>(n + 1 - m);
        const double w = static_cast<double>(n - y + 1);
        const double z2 = z * z, x2 = x1 * x1, f2 = f1 * f1, w2 = w * w;
        const double t =
            xm * std::log(f1 / x1) +
            (nd - static_cast<double>(m) + 0.5) * std::log(z / w) +
            static_cast<double>(y - m) * std::log(w * r / (x1 * q)) +
            (13860.0 -
             (462.0 - (132.0 - (99.0 - 140.0 / f2) / f2) / f2) / f2) /
                f1 / 166320.0 +
            (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / z2) / z2) / z2) / z2) /
                z / 166320.0 +
            (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / x2) / x2) / x2) / x2) /
                x1 / 166320.0 +
            (13860.0 - (462.0 - (132.0 - (99.0 - 140.0 / w2) / w2) / w2) / w2) /
                w / 166320.0;
        if (alv <= t) return y;
      }
    }
  }
}

double log_binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) -
         std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
         (nd - kd) * std::log1p(-p);
}

}  // namespace

std::int64_t sample_binomial(std::int64_t n, double p, Rng& rng) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw std::domain_error("sample_binomial: need n >= 0 and p in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flipped = p > 0.5;
  const double r = flipped ? 1.0 - p : p;
  const std::int64_t k = (static_cast<double>(n) * r < 30.0)
                             ? binv(n, r, rng)
                             : btpe(n, r, rng);
  return flipped ? n - k : k;
}

std::int64_t binomial_quantile(std::int64_t n, double p, double u) {
  if (n < 0 || p < 0.0 || p > 1.0 || u < 0.0 || u >= 1.0)
    throw std::domain_error(
        "binomial_quantile: need n >= 0, p in [0, 1], u in [0, 1)");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;

  // Start at the mode so the pmf recurrences never start from an
  // underflowed value; everything below exp(-700) of the mode carries
  // less mass than a 53-bit uniform can resolve.
  std::int64_t mode = static_cast<std::int64_t>(
      std::floor(static_cast<double>(n + 1) * p));
  if (mode > n) mode = n;
  const double pmf_mode = std::exp(log_binomial_pmf(n, mode, p));
  const double odds = p / (1.0 - p);

  std::vector<double> below;  // below[i] = pmf(mode - 1 - i)
  {
    double f = pmf_mode;
    std::int64_t k = mode;
    while (k > 0 && f > 1e-300) {
      f *= static_cast<double>(k) / (static_cast<double>(n - k + 1) * odds);
      --k;
      below.push_back(f);
    }
  }

  // Accumulate the CDF upward from the left edge of the retained window.
  double cum = 0.0;
  for (std::size_t i = below.size(); i-- > 0;) {
    cum += below[i];
    if (cum >= u) return mode - 1 - static_cast<std::int64_t>(i);
  }
  std::int64_t k = mode;
  double f = pmf_mode;
  cum += f;
  while (cum < u && k < n) {
    f *= (static_cast<double>(n - k) / static_cast<double>(k + 1)) * odds;
    ++k;
    cum += f;
  }
  return k;
}

}  // namespace branchsim
