// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned
// here, nonzero exit when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "branchsim/coop_model.hpp"
#include "branchsim/errors.hpp"
#include "branchsim/galton_watson.hpp"
#include "branchsim/integer_distribution.hpp"
#include "branchsim/monte_carlo.hpp"
#include "branchsim/phase_sweep.hpp"
#include "branchsim/rng.hpp"

using namespace branchsim;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", idx,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int hw_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

constexpr std::uint64_t kSeed = 20260816;

double sup_diff(const IntegerDistribution& a, const IntegerDistribution& b) {
  const std::int64_t lo = std::min(a.min_value(), b.min_value());
  const std::int64_t hi = std::max(a.max_value(), b.max_value());
  double worst = 0.0;
  for (std::int64_t v = lo; v <= hi; ++v)
    worst = std::max(worst, std::abs(a.pmf(v) - b.pmf(v)));
  return worst;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in.good()) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_1() {
  const auto t0 = Clock::now();
  Rng rng = derive_stream(kSeed, 1, 0, 0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const CoopParams pq{rng.next_unit(), rng.next_unit()};
    worst = std::max(worst, std::abs(h_exact(pq) - h_polynomial(pq)));
  }
  const double el = seconds_since(t0);
  std::ostringstream os;
  os << "max |h_exact - h_polynomial| = " << worst
     << " over 10^4 random (p,q), tol 1e-12; " << el << " s (limit 5)";
  report(1, worst < 1e-12 && el < 5.0, os.str());
}

void criterion_2() {
  const auto t0 = Clock::now();
  const auto law = OffspringLaw::from_binomial(2, 0.75);
  const double target = 1.0 - extinction_probability(law, 1e-12);
  const auto est = gw_survival_mc(law, 1, 100000, 1000, 1000000, kSeed,
                                  hw_jobs());
  const double se = std::sqrt(target * (1.0 - target) / 100000.0);
  const double el = seconds_since(t0);
  std::ostringstream os;
  os << "q=0.75 survival " << est.estimate << " vs pgf target " << target
     << ", |diff| = " << std::abs(est.estimate - target) << " <= 3se = "
     << 3.0 * se << "; " << el << " s (limit 30)";
  report(2, std::abs(est.estimate - target) <= 3.0 * se && el < 30.0,
         os.str());
}

void criterion_3() {
  const auto law = OffspringLaw::from_binomial(2, 0.4);
  double worst = -1.0;
  for (std::int64_t n = 1; n <= 20; ++n)
    worst = std::max(worst,
                     tau_tail_exact(1, law, n) - std::pow(0.8, double(n)));
  std::ostringstream os;
  os << "q=0.4: max over n=1..20 of tau_tail - 0.8^n = " << worst
     << ", tol 1e-12";
  report(3, worst <= 1e-12, os.str());
}

void criterion_4() {
  const auto law = OffspringLaw::from_binomial(2, 0.5);
  double worst = 0.0;
  for (std::int64_t n = 1; n <= 6; ++n)
    for (std::int64_t t = 1; t <= 6; ++t)
      worst = std::max(worst,
                       exact_law_at(n, law, t).tail(2 * n) - 0.5);
  const auto cert = certificate_search(law, 6, 6);
  std::ostringstream os;
  os << "q=0.5: max P^N(Y_T >= 2N) - 1/2 = " << worst
     << " over N,T <= 6, tol 1e-12; certificate "
     << (cert ? "found (unexpected)" : "none");
  report(4, worst <= 1e-12 && !cert, os.str());
}

void criterion_5() {
  double worst = 0.0;
  for (const double q : {0.4, 0.6, 0.9}) {
    const auto law = OffspringLaw::from_binomial(2, q);
    for (std::int64_t n1 = 1; n1 <= 3; ++n1)
      for (std::int64_t n2 = n1; n2 <= 3; ++n2)
        for (std::int64_t t = 0; t <= 4; ++t)
          worst = std::max(
              worst,
              sup_diff(exact_law_at(n1 + n2, law, t),
                       convolve(exact_law_at(n1, law, t),
                                exact_law_at(n2, law, t), 0.0)));
    // Subsampled chain: the law at 2t equals one coarse step of the
    // t-step chain applied to the t-step law.
    for (std::int64_t n = 1; n <= 3; ++n)
      for (std::int64_t t = 1; t <= 2; ++t) {
        const auto fine = exact_law_at(n, law, 2 * t);
        const auto coarse = exact_law_at(n, law, t);
        const auto kernel = exact_law_at(1, law, t);
        // The mixture can reach coarse.max * kernel.max even when the
        // default truncation trimmed fine's support short of it.
        const std::int64_t hi =
            std::max(fine.max_value(),
                     coarse.max_value() * std::max<std::int64_t>(
                                              kernel.max_value(), 1));
        std::vector<double> acc(static_cast<std::size_t>(hi) + 1, 0.0);
        for (std::int64_t k = coarse.min_value(); k <= coarse.max_value();
             ++k) {
          const auto powk = convolve_power(kernel, k, 0.0);
          for (std::int64_t v = powk.min_value(); v <= powk.max_value(); ++v)
            acc[static_cast<std::size_t>(v)] += coarse.pmf(k) * powk.pmf(v);
        }
        for (std::int64_t v = 0; v <= hi; ++v)
          worst = std::max(
              worst,
              std::abs(acc[static_cast<std::size_t>(v)] - fine.pmf(v)));
      }
  }
  std::ostringstream os;
  os << "additivity + subsampling sup-norm gap = " << worst
     << " over q in {0.4,0.6,0.9}, N <= 3, T <= 4, tol 1e-12";
  report(5, worst < 1e-12, os.str());
}

void criterion_6() {
  const auto cert =
      certificate_search(OffspringLaw::from_binomial(2, 0.9), 8, 8);
  std::ostringstream os;
  if (cert)
    os << "q=0.9 certificate (N=" << cert->block_size << ", T="
       << cert->block_time << ", value=" << cert->value
       << "), expected (1, 1, 0.81) exactly";
  else
    os << "q=0.9 certificate missing";
  report(6, cert && cert->block_size == 1 && cert->block_time == 1 &&
                cert->value == 0.81,
         os.str());
}

void criterion_7() {
  const auto law = OffspringLaw::from_binomial(2, 0.9);
  const auto bound = survival_lower_bound(law, 1.4, 2, 10, 50);
  const auto est = gw_survival_mc(law, 10, 100000, 1000, 1000000, kSeed,
                                  hw_jobs());
  const double se =
      std::sqrt(est.estimate * (1.0 - est.estimate) / 100000.0);
  std::ostringstream os;
  os << "product bound " << bound.bound << " <= MC estimate " << est.estimate
     << " + 3se = " << est.estimate + 3.0 * se
     << " (a=1.4, M=2, initial=10, terms=50)";
  report(7, bound.bound <= est.estimate + 3.0 * se, os.str());
}

void criterion_8() {
  const auto t0 = Clock::now();
  const auto est =
      coop_survival_mc({0.4, 0.95}, 10000, 1000000, kSeed, hw_jobs());
  const double el = seconds_since(t0);
  std::ostringstream os;
  os << "(p,q)=(0.4,0.95): " << est.successes << "/" << est.trials
     << " survived, 99% CI upper " << est.ci99_high << " < 0.01; " << el
     << " s (limit 60)";
  report(8, est.ci99_high < 0.01 && el < 60.0, os.str());
}

void criterion_9() {
  const auto cert = coop_certificate_search({0.9, 0.9}, 4, 4);
  const auto est =
      coop_survival_mc({0.9, 0.9}, 10000, 100000000, kSeed, hw_jobs());
  std::ostringstream os;
  const bool cert_ok = cert && cert->block_size == 1 &&
                       cert->block_time == 1 &&
                       std::abs(cert->value - 1.796904) <= 1e-9;
  if (cert)
    os << "(0.9,0.9) certificate value " << cert->value
       << " at (N,T)=(" << cert->block_size << "," << cert->block_time
       << "), |value - 1.796904| <= 1e-9; MC 99% CI low " << est.ci99_low
       << " > 0";
  else
    os << "(0.9,0.9) certificate missing";
  report(9, cert_ok && est.ci99_low > 0.0, os.str());
}

void criterion_10() {
  double worst = 0.0;
  for (const double p : {0.6, 0.7, 0.8, 0.9, 1.0}) {
    const double qs = critical_q(p, 1e-12);
    worst = std::max(worst, std::abs(h_polynomial({p, qs}) - 1.0));
  }
  std::ostringstream os;
  os << "max |h(p, critical_q(p)) - 1| = " << worst
     << " over p in {0.6..1.0}, tol 1e-9 (bracket 1e-12)";
  report(10, worst < 1e-9, os.str());
}

void criterion_11() {
  std::int64_t checks = 0, good = 0;
  for (const double p : {0.3, 0.7})
    for (const double q : {0.3, 0.7}) {
      const CoopParams pq{p, q};
      for (std::int64_t n : {1, 2})
        for (std::int64_t t : {1, 2})
          for (std::int64_t k = 0; k <= 2; ++k)
            for (std::int64_t x = 0; x <= 2 * n; ++x)
              for (std::int64_t y = 0; y <= 2 * n; ++y) {
                ++checks;
                if (grandpas_check(x, y, k, n, t, pq)) ++good;
              }
    }
  std::int64_t dom_checks = 0, dom_good = 0;
  for (const double p : {0.3, 0.7})
    for (const double q : {0.3, 0.7}) {
      const CoopParams pq{p, q};
      for (std::int64_t x1 = 0; x1 <= 3; ++x1)
        for (std::int64_t y1 = 0; y1 <= 3; ++y1)
          for (std::int64_t x2 = 0; x2 <= 3; ++x2)
            for (std::int64_t y2 = 0; y2 <= 3; ++y2) {
              ++dom_checks;
              if (domination_check({x1, y1}, {x2, y2}, pq)) ++dom_good;
            }
    }
  std::ostringstream os;
  os << "block comparison " << good << "/" << checks
     << " hold (x,y <= 2N, N,T <= 2, k <= 2); domination " << dom_good << "/"
     << dom_checks << " hold (states <= 3), slack 1e-9 / 1e-12";
  report(11, good == checks && dom_good == dom_checks, os.str());
}

void criterion_12() {
  namespace fs = std::filesystem;
  const fs::path one = fs::temp_directory_path() / "acceptance_jobs1.csv";
  const fs::path eight = fs::temp_directory_path() / "acceptance_jobs8.csv";
  const std::string base = std::string(BRANCHSIM_CLI) +
                           " coop phase --step 0.1 --trials 100 --seed 424242";
  const int r1 = std::system(
      (base + " --jobs 1 --csv " + one.string() + " > /dev/null 2>&1").c_str());
  const int r8 = std::system(
      (base + " --jobs 8 --csv " + eight.string() + " > /dev/null 2>&1")
          .c_str());
  const std::string a = slurp(one), b = slurp(eight);
  std::ostringstream os;
  os << "coop phase step 0.1, trials 100, jobs 1 vs 8: " << a.size()
     << " bytes vs " << b.size() << " bytes, byte-identical="
     << (a == b && !a.empty() ? "yes" : "no");
  report(12, r1 == 0 && r8 == 0 && !a.empty() && a == b, os.str());
  fs::remove(one);
  fs::remove(eight);
}

void criterion_13() {
  const auto t0 = Clock::now();
  SweepConfig cfg;
  cfg.step = 0.05;
  cfg.trials = 500;
  cfg.seed = kSeed;
  cfg.jobs = hw_jobs();
  cfg.estimator = Estimator::McSurvival;
  const PhaseGrid grid = sweep(cfg);

  std::int64_t low_p_cells = 0, low_p_successes = 0;
  double worst_p = 0.0, worst_q = 0.0;
  std::int64_t worst_successes = 0;
  bool contains_hot = false;
  for (std::size_t i = 0; i < grid.p_axis.size(); ++i)
    for (std::size_t j = 0; j < grid.q_axis.size(); ++j) {
      const double v = grid.at(i, j);
      if (v <= 0.0) continue;
      const double p = grid.p_axis[i], q = grid.q_axis[j];
      if (std::abs(p - 0.9) < 1e-9 && std::abs(q - 0.9) < 1e-9)
        contains_hot = true;
      if (p < 0.5) {
        ++low_p_cells;
        const auto successes =
            static_cast<std::int64_t>(std::llround(v * cfg.trials));
        low_p_successes += successes;
        if (successes > worst_successes) {
          worst_successes = successes;
          worst_p = p;
          worst_q = q;
        }
      }
    }

  bool h_nonempty = false, h_in_halfplane = true;
  for (const double p : grid.p_axis)
    for (const double q : grid.q_axis)
      if (h_polynomial({p, q}) > 1.0) {
        h_nonempty = true;
        if (p <= 0.5) h_in_halfplane = false;
      }

  const double el = seconds_since(t0);
  const bool mc_region_clean = low_p_cells == 0;
  std::ostringstream os;
  os << "step 0.05, trials 500: MC region empty for p<0.5: "
     << (mc_region_clean ? "yes" : "no") << "; contains (0.9,0.9): "
     << (contains_hot ? "yes" : "no") << "; h>1 region nonempty: "
     << (h_nonempty ? "yes" : "no") << ", inside p>0.5: "
     << (h_in_halfplane ? "yes" : "no") << "; " << el << " s (limit 600)";
  report(13,
         mc_region_clean && contains_hot && h_nonempty && h_in_halfplane &&
             el < 600.0,
         os.str());
  if (!mc_region_clean) {
    std::printf(
        "  analysis: %lld cells with p < 0.5 recorded %lld surviving trials "
        "in total (max %lld/500 at p=%g, q=%g).  These are threshold-race "
        "false positives: with q large the type-1 count reaches the 1e8 "
        "explosion cutoff in ~27 doublings, and a type-2 line at fertility "
        "2p < 1 stays alive that long with probability up to (2p)^27 "
        "(6e-2 at p=0.45; measured rate ~5e-3 per trial).  Across hundreds "
        "of such cells x 500 trials the chance that every one stays at zero "
        "is astronomically small, so the clause cannot hold for this "
        "estimator at any trial count.\n",
        static_cast<long long>(low_p_cells),
        static_cast<long long>(low_p_successes),
        static_cast<long long>(worst_successes), worst_p, worst_q);
    std::fflush(stdout);
  }
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();
  std::printf("%d/13 criteria passed in %.1f s\n", 13 - g_failures,
              seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
