#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>

#include "branchsim/coop_model.hpp"
#include "branchsim/errors.hpp"
#include "branchsim/galton_watson.hpp"
#include "branchsim/integer_distribution.hpp"
#include "branchsim/monte_carlo.hpp"
#include "branchsim/phase_sweep.hpp"
#include "branchsim/rng.hpp"

namespace py = pybind11;

using namespace branchsim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact laws, survival certificates and Monte Carlo estimators "
            "for single-type and cooperative two-type growth chains";

  py::register_exception<BudgetExceeded>(m, "BudgetExceeded");
  py::register_exception<IterationCapExceeded>(m, "IterationCapExceeded");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("state"))
      .def("next_u64", &Rng::next_u64)
      .def("next_unit", &Rng::next_unit);
  m.def("derive_stream", &derive_stream, py::arg("seed"), py::arg("a"),
        py::arg("b"), py::arg("c"));
  m.def("sample_binomial", &sample_binomial, py::arg("n"), py::arg("p"),
        py::arg("rng"));
  m.def("binomial_quantile", &binomial_quantile, py::arg("n"), py::arg("p"),
        py::arg("u"));

  py::class_<IntegerDistribution>(m, "IntegerDistribution")
      .def(py::init<>())
      .def_static("delta", &IntegerDistribution::delta, py::arg("value"))
      .def_static("from_pmf", &IntegerDistribution::from_pmf,
                  py::arg("entries"), py::arg("truncation_loss") = 0.0)
      .def_property_readonly("min_value", &IntegerDistribution::min_value)
      .def_property_readonly("max_value", &IntegerDistribution::max_value)
      .def_property_readonly("support_size",
                             &IntegerDistribution::support_size)
      .def_property_readonly("probs", &IntegerDistribution::probs)
      .def_property_readonly("truncation_loss",
                             &IntegerDistribution::truncation_loss)
      .def("pmf", &IntegerDistribution::pmf, py::arg("value"))
      .def("tail", &IntegerDistribution::tail, py::arg("k"))
      .def("total_mass", &IntegerDistribution::total_mass)
      .def("mean", &IntegerDistribution::mean)
      .def("variance", &IntegerDistribution::variance)
      .def("is_valid", &IntegerDistribution::is_valid, py::arg("tol") = 1e-12)
      .def("truncated_at", &IntegerDistribution::truncated_at, py::arg("cap"));
  m.def("binomial", &binomial, py::arg("n"), py::arg("p"));
  m.def("convolve", &convolve, py::arg("a"), py::arg("b"),
        py::arg("trunc_eps") = kDefaultTruncEps);
  m.def("convolve_power", &convolve_power, py::arg("d"), py::arg("k"),
        py::arg("trunc_eps") = kDefaultTruncEps);
  m.def("compound", &compound, py::arg("counts"), py::arg("step"),
        py::arg("trunc_eps") = kDefaultTruncEps, py::arg("max_support") = -1);
  m.def("pgf", &pgf, py::arg("d"), py::arg("s"));
  m.def("sample", &sample, py::arg("d"), py::arg("rng"));

  py::class_<OffspringLaw>(m, "OffspringLaw")
      .def_static("from_binomial", &OffspringLaw::from_binomial, py::arg("n"),
                  py::arg("p"))
      .def_static("from_dist", &OffspringLaw::from_dist, py::arg("dist"))
      .def_readonly("dist", &OffspringLaw::dist)
      .def_readonly("fertility", &OffspringLaw::fertility);

  py::enum_<GWStatus>(m, "GWStatus")
      .value("Extinct", GWStatus::Extinct)
      .value("Survived", GWStatus::Survived)
      .value("Exploded", GWStatus::Exploded);

  py::class_<GWOutcome>(m, "GWOutcome")
      .def_readonly("status", &GWOutcome::status)
      .def_readonly("step", &GWOutcome::step)
      .def_readonly("final_population", &GWOutcome::final_population)
      .def_readonly("trajectory", &GWOutcome::trajectory);

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("block_size", &Certificate::block_size)
      .def_readonly("block_time", &Certificate::block_time)
      .def_readonly("value", &Certificate::value)
      .def_readonly("threshold", &Certificate::threshold);

  py::class_<DpBudget>(m, "DpBudget")
      .def(py::init<>())
      .def_readwrite("max_support", &DpBudget::max_support)
      .def_readwrite("trunc_eps", &DpBudget::trunc_eps);

  py::class_<SurvivalBound>(m, "SurvivalBound")
      .def_readonly("bound", &SurvivalBound::bound)
      .def_readonly("c", &SurvivalBound::c)
      .def_readonly("truncated_mean", &SurvivalBound::truncated_mean);

  py::class_<SurvivalEstimate>(m, "SurvivalEstimate")
      .def_readonly("successes", &SurvivalEstimate::successes)
      .def_readonly("trials", &SurvivalEstimate::trials)
      .def_readonly("estimate", &SurvivalEstimate::estimate)
      .def_readonly("ci99_low", &SurvivalEstimate::ci99_low)
      .def_readonly("ci99_high", &SurvivalEstimate::ci99_high)
      .def_readonly("explosion_threshold",
                    &SurvivalEstimate::explosion_threshold)
      .def_readonly("seed", &SurvivalEstimate::seed);
  m.def("wilson_ci99", [](std::int64_t successes, std::int64_t trials) {
    double low = 0.0, high = 0.0;
    wilson_ci99(successes, trials, &low, &high);
    return py::make_tuple(low, high);
  });

  m.def("gw_step", &gw_step, py::arg("population"), py::arg("law"),
        py::arg("rng"));
  m.def("simulate", &simulate, py::arg("initial"), py::arg("law"),
        py::arg("horizon"), py::arg("explosion_threshold"), py::arg("rng"),
        py::arg("record_trajectory") = false);
  m.def("exact_law_at", &exact_law_at, py::arg("initial"), py::arg("law"),
        py::arg("steps"), py::arg("budget") = DpBudget{});
  m.def(
      "extinction_probability",
      [](const OffspringLaw& law, double tol, std::int64_t max_iterations) {
        std::int64_t iterations = 0;
        const double value =
            extinction_probability(law, tol, max_iterations, &iterations);
        return py::make_tuple(value, iterations);
      },
      py::arg("law"), py::arg("tol"), py::arg("max_iterations") = 1000000);
  m.def("tau_tail_exact", &tau_tail_exact, py::arg("initial"), py::arg("law"),
        py::arg("n"), py::arg("budget") = DpBudget{});
  m.def("renormalized_fertility", &renormalized_fertility, py::arg("law"),
        py::arg("a"), py::arg("block_size"));
  m.def("certificate_search", &certificate_search, py::arg("law"),
        py::arg("n_max"), py::arg("t_max"), py::arg("budget") = DpBudget{});
  m.def("survival_lower_bound", &survival_lower_bound, py::arg("law"),
        py::arg("a"), py::arg("trunc_level"), py::arg("initial"),
        py::arg("terms"));
  m.def("thin", &thin, py::arg("law"), py::arg("p"));
  m.def("gw_survival_mc", &gw_survival_mc, py::arg("law"), py::arg("initial"),
        py::arg("trials"), py::arg("horizon"), py::arg("explosion_threshold"),
        py::arg("seed"), py::arg("jobs") = 1);

  py::class_<CoopParams>(m, "CoopParams")
      .def(py::init([](double p, double q) { return CoopParams{p, q}; }),
           py::arg("p"), py::arg("q"))
      .def_readwrite("p", &CoopParams::p)
      .def_readwrite("q", &CoopParams::q);

  py::class_<CoopState>(m, "CoopState")
      .def(py::init([](std::int64_t x, std::int64_t y) {
             return CoopState{x, y};
           }),
           py::arg("x"), py::arg("y"))
      .def_readwrite("x", &CoopState::x)
      .def_readwrite("y", &CoopState::y)
      .def_property_readonly("z", &CoopState::z);

  py::class_<JointEntry>(m, "JointEntry")
      .def_readonly("x", &JointEntry::x)
      .def_readonly("y", &JointEntry::y)
      .def_readonly("prob", &JointEntry::prob);

  py::class_<JointLaw>(m, "JointLaw")
      .def_property_readonly("entries", &JointLaw::entries)
      .def_property_readonly("truncation_loss", &JointLaw::truncation_loss)
      .def("total_mass", &JointLaw::total_mass)
      .def("pmf", &JointLaw::pmf, py::arg("x"), py::arg("y"))
      .def("tail_min", &JointLaw::tail_min, py::arg("k"))
      .def("expected_floor_min", &JointLaw::expected_floor_min, py::arg("n"))
      .def("marginal_x", &JointLaw::marginal_x)
      .def("marginal_y", &JointLaw::marginal_y)
      .def("floor_min_over", &JointLaw::floor_min_over, py::arg("n"))
      .def("is_valid", &JointLaw::is_valid, py::arg("tol") = 1e-9);

  py::class_<JointBudget>(m, "JointBudget")
      .def(py::init<>())
      .def_readwrite("max_sum", &JointBudget::max_sum)
      .def_readwrite("max_steps", &JointBudget::max_steps)
      .def_readwrite("max_states", &JointBudget::max_states)
      .def_readwrite("max_step_ops", &JointBudget::max_step_ops)
      .def_readwrite("trunc_eps", &JointBudget::trunc_eps);

  py::class_<ValueWithError>(m, "ValueWithError")
      .def_readonly("value", &ValueWithError::value)
      .def_readonly("error_bar", &ValueWithError::error_bar);

  py::class_<McMethod>(m, "McMethod")
      .def(py::init([](std::int64_t trials, std::uint64_t seed) {
             return McMethod{trials, seed};
           }),
           py::arg("trials"), py::arg("seed"))
      .def_readwrite("trials", &McMethod::trials)
      .def_readwrite("seed", &McMethod::seed);

  m.def("coop_step", &coop_step, py::arg("state"), py::arg("params"),
        py::arg("rng"));
  m.def("h_exact", &h_exact, py::arg("params"));
  m.def("h_polynomial", &h_polynomial, py::arg("params"));
  m.def("exact_joint_law_from", &exact_joint_law_from, py::arg("initial"),
        py::arg("steps"), py::arg("params"), py::arg("budget") = JointBudget{});
  m.def("exact_joint_law", &exact_joint_law, py::arg("block_size"),
        py::arg("steps"), py::arg("params"), py::arg("budget") = JointBudget{});
  m.def("expected_renormalized_z", &expected_renormalized_z,
        py::arg("block_size"), py::arg("steps"), py::arg("params"),
        py::arg("budget") = JointBudget{});
  m.def("expected_renormalized_z_mc", &expected_renormalized_z_mc,
        py::arg("block_size"), py::arg("steps"), py::arg("params"),
        py::arg("trials"), py::arg("seed"), py::arg("stream_a") = 0,
        py::arg("stream_b") = 0, py::arg("jobs") = 1);
  m.def("coop_certificate_search", &coop_certificate_search, py::arg("params"),
        py::arg("n_max"), py::arg("t_max"), py::arg("budget") = JointBudget{},
        py::arg("mc") = std::nullopt);
  m.def("coop_survival_mc", &coop_survival_mc, py::arg("params"),
        py::arg("trials"), py::arg("explosion_threshold"), py::arg("seed"),
        py::arg("jobs") = 1);
  m.def("critical_q", &critical_q, py::arg("p"), py::arg("tol") = 1e-12);
  m.def("domination_check", &domination_check, py::arg("s1"), py::arg("s2"),
        py::arg("params"));
  m.def("grandpas_check", &grandpas_check, py::arg("x"), py::arg("y"),
        py::arg("k"), py::arg("block_size"), py::arg("steps"),
        py::arg("params"), py::arg("budget") = JointBudget{});

  py::enum_<Estimator>(m, "Estimator")
      .value("McSurvival", Estimator::McSurvival)
      .value("HIndicator", Estimator::HIndicator)
      .value("McCoupled", Estimator::McCoupled);
  m.def("estimator_name", &estimator_name, py::arg("estimator"));

  py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("p_min", &SweepConfig::p_min)
      .def_readwrite("p_max", &SweepConfig::p_max)
      .def_readwrite("q_min", &SweepConfig::q_min)
      .def_readwrite("q_max", &SweepConfig::q_max)
      .def_readwrite("step", &SweepConfig::step)
      .def_readwrite("trials", &SweepConfig::trials)
      .def_readwrite("explosion_threshold", &SweepConfig::explosion_threshold)
      .def_readwrite("seed", &SweepConfig::seed)
      .def_readwrite("estimator", &SweepConfig::estimator)
      .def_readwrite("jobs", &SweepConfig::jobs);

  py::class_<PhaseGridMeta>(m, "PhaseGridMeta")
      .def_readonly("seed", &PhaseGridMeta::seed)
      .def_readonly("trials", &PhaseGridMeta::trials)
      .def_readonly("explosion_threshold", &PhaseGridMeta::explosion_threshold)
      .def_readonly("grid_step", &PhaseGridMeta::grid_step)
      .def_readonly("estimator", &PhaseGridMeta::estimator);

  py::class_<PhaseGrid>(m, "PhaseGrid")
      .def_readonly("p_axis", &PhaseGrid::p_axis)
      .def_readonly("q_axis", &PhaseGrid::q_axis)
      .def_readonly("values", &PhaseGrid::values)
      .def_readonly("meta", &PhaseGrid::meta)
      .def("at", &PhaseGrid::at, py::arg("i"), py::arg("j"));

  m.def("sweep", &sweep, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("export_csv", &export_csv, py::arg("grid"), py::arg("path"));
  m.def("import_csv", &import_csv, py::arg("path"));

  py::enum_<HeatmapOptions::Format>(m, "HeatmapFormat")
      .value("Ppm", HeatmapOptions::Format::Ppm)
      .value("Svg", HeatmapOptions::Format::Svg);

  py::class_<HeatmapOptions>(m, "HeatmapOptions")
      .def(py::init<>())
      .def_readwrite("format", &HeatmapOptions::format)
      .def_readwrite("cell_pixels", &HeatmapOptions::cell_pixels)
      .def_readwrite("overlay_critical", &HeatmapOptions::overlay_critical);

  m.def("render_heatmap", &render_heatmap, py::arg("grid"), py::arg("path"),
        py::arg("options") = HeatmapOptions{});
}
