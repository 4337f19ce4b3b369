#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "branchsim/coop_model.hpp"
#include "branchsim/errors.hpp"
#include "branchsim/galton_watson.hpp"
#include "branchsim/phase_sweep.hpp"

namespace {

using namespace branchsim;

// Shortest decimal that round-trips, so output is byte-stable across
// platforms and reparseable without loss.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print_estimate(const SurvivalEstimate& est) {
  std::cout << "survival=" << fmt(est.estimate)
            << " ci99_low=" << fmt(est.ci99_low)
            << " ci99_high=" << fmt(est.ci99_high)
            << " successes=" << est.successes << " trials=" << est.trials
            << "\n";
}

std::uint64_t env_default_seed() {
  const char* env = std::getenv("BRANCHSIM_SEED");
  if (!env || !*env) return 0;
  std::uint64_t v = 0;
  const char* end = env + std::string(env).size();
  const auto res = std::from_chars(env, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument(
        "BRANCHSIM_SEED must be an unsigned 64-bit integer");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Branching chain toolkit: exact laws, survival certificates and "
      "phase diagrams"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  try {
    seed = env_default_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  double q = 0.5, p = 0.5, tol = 1e-12;
  double a = 1.4;
  std::int64_t initial = 1, horizon = 1000, threshold = 100000000;
  std::int64_t trials = 1000, steps = 1, nmax = 8, tmax = 8;
  std::int64_t m_trunc = 2, terms = 50, mc_trials = 0;
  int jobs = 1;

  auto* gw = app.add_subcommand("gw", "single-species chain");
  gw->require_subcommand(1);

  auto* sim = gw->add_subcommand(
      "simulate", "Monte Carlo survival frequency (explosion race)");
  sim->add_option("--q", q, "offspring parameter of binomial(2,q)")
      ->required();
  sim->add_option("--initial", initial, "starting population")
      ->capture_default_str();
  sim->add_option("--horizon", horizon, "maximum steps per trial")
      ->capture_default_str();
  sim->add_option("--threshold", threshold, "explosion threshold")
      ->capture_default_str();
  sim->add_option("--trials", trials, "trial count")->capture_default_str();
  sim->add_option("--seed", seed, "master seed")->capture_default_str();
  sim->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  sim->callback([&] {
    std::cout << "q=" << fmt(q) << " initial=" << initial
              << " horizon=" << horizon << " threshold=" << threshold
              << " trials=" << trials << " seed=" << seed << " jobs=" << jobs
              << "\n";
    print_estimate(gw_survival_mc(OffspringLaw::from_binomial(2, q), initial,
                                  trials, horizon, threshold, seed, jobs));
  });

  auto* ext = gw->add_subcommand(
      "extinction", "extinction probability via the pgf fixed point");
  ext->add_option("--q", q, "offspring parameter")->required();
  ext->add_option("--tol", tol, "successive-iterate tolerance")
      ->capture_default_str();
  ext->callback([&] {
    std::cout << "q=" << fmt(q) << " tol=" << fmt(tol) << "\n";
    std::int64_t iterations = 0;
    const double s = extinction_probability(OffspringLaw::from_binomial(2, q),
                                            tol, 1000000, &iterations);
    std::cout << "extinction=" << fmt(s) << " iterations=" << iterations
              << "\n";
  });

  auto* law_cmd =
      gw->add_subcommand("law", "exact population law after a fixed time");
  law_cmd->add_option("--q", q, "offspring parameter")->required();
  law_cmd->add_option("--initial", initial, "starting population")
      ->capture_default_str();
  law_cmd->add_option("--steps", steps, "generations")->capture_default_str();
  law_cmd->callback([&] {
    const auto d =
        exact_law_at(initial, OffspringLaw::from_binomial(2, q), steps);
    std::cout << "q=" << fmt(q) << " initial=" << initial
              << " steps=" << steps
              << " truncation_loss=" << fmt(d.truncation_loss()) << "\n";
    std::cout << "value,prob\n";
    for (std::int64_t v = d.min_value(); v <= d.max_value(); ++v)
      std::cout << v << ',' << fmt(d.pmf(v)) << "\n";
  });

  auto* cert = gw->add_subcommand(
      "certificate", "block doubling event with probability above 1/2");
  cert->add_option("--q", q, "offspring parameter")->required();
  cert->add_option("--nmax", nmax, "largest block size")
      ->capture_default_str();
  cert->add_option("--tmax", tmax, "largest block time")
      ->capture_default_str();
  cert->callback([&] {
    std::cout << "q=" << fmt(q) << " nmax=" << nmax << " tmax=" << tmax
              << "\n";
    const auto found =
        certificate_search(OffspringLaw::from_binomial(2, q), nmax, tmax);
    std::cout << "found=" << (found ? 1 : 0) << "\n";
    if (found)
      std::cout << "N=" << found->block_size << " T=" << found->block_time
                << " value=" << fmt(found->value)
                << " threshold=" << fmt(found->threshold) << "\n";
  });

  auto* bound = gw->add_subcommand(
      "bound", "product lower bound on survival from a large start");
  bound->add_option("--q", q, "offspring parameter")->required();
  bound->add_option("--a", a, "growth factor in (1, fertility)")
      ->capture_default_str();
  bound->add_option("--m-trunc", m_trunc, "offspring truncation level")
      ->capture_default_str();
  bound->add_option("--initial", initial, "starting population")
      ->capture_default_str();
  bound->add_option("--terms", terms, "product terms")->capture_default_str();
  bound->callback([&] {
    std::cout << "q=" << fmt(q) << " a=" << fmt(a) << " m_trunc=" << m_trunc
              << " initial=" << initial << " terms=" << terms << "\n";
    const auto res = survival_lower_bound(OffspringLaw::from_binomial(2, q), a,
                                          m_trunc, initial, terms);
    std::cout << "bound=" << fmt(res.bound) << " c=" << fmt(res.c)
              << " truncated_mean=" << fmt(res.truncated_mean) << "\n";
  });

  auto* coop = app.add_subcommand("coop", "two-species cooperative chain");
  coop->require_subcommand(1);

  auto* hcmd = coop->add_subcommand(
      "h", "expected next-step minimum from (1,1)");
  hcmd->add_option("--p", p, "type-2 parameter")->required();
  hcmd->add_option("--q", q, "type-1 parameter")->required();
  bool use_poly = false, use_enum = false;
  auto* poly_flag =
      hcmd->add_flag("--polynomial", use_poly, "eight-monomial form");
  hcmd->add_flag("--enumerate", use_enum, "64-outcome enumeration")
      ->excludes(poly_flag);
  hcmd->callback([&] {
    const CoopParams params{p, q};
    params.validate();
    std::cout << "p=" << fmt(p) << " q=" << fmt(q)
              << " method=" << (use_enum ? "enumerate" : "polynomial") << "\n";
    std::cout << "h=" << fmt(use_enum ? h_exact(params) : h_polynomial(params))
              << "\n";
  });

  auto* survive = coop->add_subcommand(
      "survive", "Monte Carlo survival frequency from (1,1)");
  survive->add_option("--p", p, "type-2 parameter")->required();
  survive->add_option("--q", q, "type-1 parameter")->required();
  survive->add_option("--trials", trials, "trial count")
      ->capture_default_str();
  survive->add_option("--threshold", threshold, "explosion threshold")
      ->capture_default_str();
  survive->add_option("--seed", seed, "master seed")->capture_default_str();
  survive->add_option("--jobs", jobs, "worker threads")
      ->capture_default_str();
  survive->callback([&] {
    std::cout << "p=" << fmt(p) << " q=" << fmt(q) << " trials=" << trials
              << " threshold=" << threshold << " seed=" << seed
              << " jobs=" << jobs << "\n";
    print_estimate(coop_survival_mc({p, q}, trials, threshold, seed, jobs));
  });

  auto* ccert = coop->add_subcommand(
      "certificate", "renormalized block with expected growth above 1");
  ccert->add_option("--p", p, "type-2 parameter")->required();
  ccert->add_option("--q", q, "type-1 parameter")->required();
  ccert->add_option("--nmax", nmax, "largest block size")
      ->capture_default_str();
  ccert->add_option("--tmax", tmax, "largest block time")
      ->capture_default_str();
  ccert->add_option("--mc-trials", mc_trials,
                    "Monte Carlo trials per block (0 = exact DP)")
      ->capture_default_str();
  ccert->add_option("--seed", seed, "master seed (Monte Carlo mode)")
      ->capture_default_str();
  ccert->callback([&] {
    std::cout << "p=" << fmt(p) << " q=" << fmt(q) << " nmax=" << nmax
              << " tmax=" << tmax
              << " method=" << (mc_trials > 0 ? "mc" : "exact");
    if (mc_trials > 0) std::cout << " mc_trials=" << mc_trials
                                 << " seed=" << seed;
    std::cout << "\n";
    std::optional<McMethod> mc;
    if (mc_trials > 0) mc = McMethod{mc_trials, seed};
    const auto found = coop_certificate_search({p, q}, nmax, tmax, {}, mc);
    std::cout << "found=" << (found ? 1 : 0) << "\n";
    if (found)
      std::cout << "N=" << found->block_size << " T=" << found->block_time
                << " value=" << fmt(found->value)
                << " threshold=" << fmt(found->threshold) << "\n";
  });

  auto* crit = coop->add_subcommand(
      "critical-q", "q at which the expected minimum crosses 1");
  crit->add_option("--p", p, "type-2 parameter")->required();
  crit->add_option("--tol", tol, "bisection bracket width")
      ->capture_default_str();
  crit->callback([&] {
    std::cout << "p=" << fmt(p) << " tol=" << fmt(tol) << "\n";
    const double qs = critical_q(p, tol);
    const double residual = std::abs(h_polynomial({p, qs}) - 1.0);
    std::cout << "critical_q=" << fmt(qs) << " residual=" << fmt(residual)
              << "\n";
  });

  auto* phase = coop->add_subcommand(
      "phase", "survival sweep over the (p,q) grid");
  double step = 0.025;
  double p_min = 0.0, p_max = 1.0, q_min = 0.0, q_max = 1.0;
  std::string csv_path, heatmap_path, format = "ppm", estimator =
      "mc_survival";
  bool overlay = false, paper_scale = false;
  int scale = 4;
  auto* step_opt =
      phase->add_option("--step", step, "grid step")->capture_default_str();
  phase->add_flag("--paper-scale", paper_scale,
                  "use the full-resolution grid step 0.00125")
      ->excludes(step_opt);
  phase->add_option("--trials", trials, "trials per cell")
      ->capture_default_str();
  phase->add_option("--threshold", threshold, "explosion threshold")
      ->capture_default_str();
  phase->add_option("--seed", seed, "master seed")->capture_default_str();
  phase->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  phase->add_option("--csv", csv_path, "output CSV path")->required();
  phase->add_option("--heatmap", heatmap_path, "output image path");
  phase->add_option("--format", format, "heatmap format")
      ->check(CLI::IsMember({"ppm", "svg"}))
      ->capture_default_str();
  phase->add_flag("--overlay-critical", overlay,
                  "draw the h(p,q)=1 curve on the heatmap");
  phase->add_option("--scale", scale, "pixels per grid cell")
      ->capture_default_str();
  phase->add_option("--estimator", estimator, "cell estimator")
      ->check(CLI::IsMember(
          {"mc_survival", "h_indicator", "mc_survival_coupled"}))
      ->capture_default_str();
  phase->add_option("--p-min", p_min, "lowest p")->capture_default_str();
  phase->add_option("--p-max", p_max, "highest p")->capture_default_str();
  phase->add_option("--q-min", q_min, "lowest q")->capture_default_str();
  phase->add_option("--q-max", q_max, "highest q")->capture_default_str();
  phase->callback([&] {
    SweepConfig cfg;
    cfg.p_min = p_min;
    cfg.p_max = p_max;
    cfg.q_min = q_min;
    cfg.q_max = q_max;
    cfg.step = paper_scale ? 0.00125 : step;
    cfg.trials = trials;
    cfg.explosion_threshold = threshold;
    cfg.seed = seed;
    cfg.jobs = jobs;
    if (estimator == "h_indicator")
      cfg.estimator = Estimator::HIndicator;
    else if (estimator == "mc_survival_coupled")
      cfg.estimator = Estimator::McCoupled;
    std::cout << "step=" << fmt(cfg.step) << " trials=" << trials
              << " threshold=" << threshold << " seed=" << seed
              << " estimator=" << estimator << " jobs=" << jobs
              << " p_min=" << fmt(p_min) << " p_max=" << fmt(p_max)
              << " q_min=" << fmt(q_min) << " q_max=" << fmt(q_max) << "\n";
    const PhaseGrid grid = sweep(cfg);
    export_csv(grid, csv_path);
    std::cout << "csv=" << csv_path << " cells="
              << grid.p_axis.size() * grid.q_axis.size() << "\n";
    if (!heatmap_path.empty()) {
      HeatmapOptions opt;
      opt.format = format == "svg" ? HeatmapOptions::Format::Svg
                                   : HeatmapOptions::Format::Ppm;
      opt.cell_pixels = scale;
      opt.overlay_critical = overlay;
      render_heatmap(grid, heatmap_path, opt);
      std::cout << "heatmap=" << heatmap_path << " format=" << format << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
