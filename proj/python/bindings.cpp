// Python bindings for the moment-dynamics core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lindblad/config.hpp"
#include "lindblad/io.hpp"
#include "lindblad/observables.hpp"
#include "lindblad/propagator.hpp"
#include "lindblad/validation.hpp"

namespace py = pybind11;
using namespace lindblad;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dissipative tunneling of a Gaussian wave packet in piecewise parabolic "
              "potentials via five-moment Lindblad dynamics.";

    m.attr("HBAR") = units::hbar;
    m.attr("LIGHT_SPEED") = units::light_speed;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<StepFailure>(m, "StepFailure", PyExc_RuntimeError);
    py::register_exception<DegenerateCovariance>(m, "DegenerateCovariance", PyExc_ValueError);
    py::register_exception<RateUndefined>(m, "RateUndefined", PyExc_ArithmeticError);
    py::register_exception<BracketError>(m, "BracketError", PyExc_ValueError);
    py::register_exception<QuadratureFailure>(m, "QuadratureFailure", PyExc_RuntimeError);

    py::class_<ParabolicSegment>(m, "ParabolicSegment")
        .def(py::init<>())
        .def_readwrite("center", &ParabolicSegment::center)
        .def_readwrite("stiffness", &ParabolicSegment::stiffness)
        .def_readwrite("offset", &ParabolicSegment::offset)
        .def_readwrite("lo", &ParabolicSegment::lo)
        .def_readwrite("hi", &ParabolicSegment::hi)
        .def("value", &ParabolicSegment::value)
        .def("slope", &ParabolicSegment::slope);

    py::class_<PiecewisePotential>(m, "PiecewisePotential")
        .def_readonly("segments", &PiecewisePotential::segments)
        .def_readonly("joins", &PiecewisePotential::joins)
        .def_readonly("q_well_a", &PiecewisePotential::q_well_a)
        .def_readonly("q_barrier", &PiecewisePotential::q_barrier)
        .def_readonly("barrier_height", &PiecewisePotential::barrier_height)
        .def_readonly("q_well_c", &PiecewisePotential::q_well_c);

    m.def("build_two_parabola", &build_two_parabola, py::arg("q_a"), py::arg("q_b"),
          py::arg("barrier_height"), py::arg("barrier_stiffness"), py::arg("v_a") = 0.0);
    m.def("build_three_parabola", &build_three_parabola, py::arg("base"), py::arg("q_c"),
          py::arg("v_c"));
    m.def("harmonic_well", &harmonic_well, py::arg("center"), py::arg("stiffness"),
          py::arg("offset") = 0.0);
    m.def("segment_at", &segment_at);
    m.def("evaluate", &evaluate);
    m.def("derivative", &derivative);
    m.def("curvature", &curvature);
    m.def("describe", &describe);
    m.def("gaussian_force_moments",
          [](const PiecewisePotential& v, double mean_q, double var_q) {
              const ForceMoments fm = gaussian_force_moments(v, mean_q, var_q);
              return py::make_tuple(fm.mean_slope, fm.mean_curvature);
          });

    py::class_<MomentState>(m, "MomentState")
        .def(py::init<>())
        .def_readwrite("t", &MomentState::t)
        .def_readwrite("mean_q", &MomentState::mean_q)
        .def_readwrite("mean_p", &MomentState::mean_p)
        .def_readwrite("cov_qq", &MomentState::cov_qq)
        .def_readwrite("cov_pp", &MomentState::cov_pp)
        .def_readwrite("cov_pq", &MomentState::cov_pq)
        .def("uncertainty_product", &MomentState::uncertainty_product);

    py::class_<LindbladParams>(m, "LindbladParams")
        .def(py::init<>())
        .def_readwrite("friction", &LindbladParams::friction)
        .def_readwrite("d_qq", &LindbladParams::d_qq)
        .def_readwrite("d_pp", &LindbladParams::d_pp)
        .def_readwrite("d_pq", &LindbladParams::d_pq)
        .def_readwrite("mass", &LindbladParams::mass)
        .def_readwrite("hbar", &LindbladParams::hbar)
        .def("validate", &LindbladParams::validate)
        .def("lindblad_constraint_ok", &LindbladParams::lindblad_constraint_ok,
             py::arg("rel_slack") = 1e-12);

    py::enum_<ClosureMode>(m, "ClosureMode")
        .value("centroid", ClosureMode::centroid)
        .value("gaussian_smeared", ClosureMode::gaussian_smeared);

    py::class_<MomentRates>(m, "MomentRates")
        .def_readonly("mean_q", &MomentRates::mean_q)
        .def_readonly("mean_p", &MomentRates::mean_p)
        .def_readonly("cov_qq", &MomentRates::cov_qq)
        .def_readonly("cov_pp", &MomentRates::cov_pp)
        .def_readonly("cov_pq", &MomentRates::cov_pq);

    m.def("rhs", &rhs);
    m.def("step_rk4", &step_rk4);

    py::class_<IntegrationControls>(m, "IntegrationControls")
        .def(py::init<>())
        .def_readwrite("dt", &IntegrationControls::dt)
        .def_readwrite("t_end", &IntegrationControls::t_end)
        .def_readwrite("stride", &IntegrationControls::stride)
        .def_readwrite("adaptive", &IntegrationControls::adaptive)
        .def_readwrite("rel_tol", &IntegrationControls::rel_tol)
        .def_readwrite("min_step", &IntegrationControls::min_step);

    py::class_<TimeSeries>(m, "TimeSeries").def_readonly("states", &TimeSeries::states);

    m.def("integrate", &integrate);

    py::class_<SegmentPropagator>(m, "SegmentPropagator")
        .def("apply", &SegmentPropagator::apply)
        .def("then", &SegmentPropagator::then)
        .def_readonly("dt", &SegmentPropagator::dt);
    m.def("segment_propagator_exact", &segment_propagator_exact);
    m.def("propagate_exact", &propagate_exact, py::arg("initial"), py::arg("segment"),
          py::arg("params"), py::arg("output_dt"), py::arg("t_end"));

    m.def("wigner_density", &wigner_density);
    m.def("tunneling_probability", &tunneling_probability);
    m.def("decay_rate", &decay_rate, py::arg("state"), py::arg("q_barrier"), py::arg("mass"),
          py::arg("normalize_by_mass") = true);

    py::class_<SweepSpec>(m, "SweepSpec")
        .def(py::init<>())
        .def_readwrite("lambda_lo", &SweepSpec::lambda_lo)
        .def_readwrite("lambda_hi", &SweepSpec::lambda_hi)
        .def_readwrite("count", &SweepSpec::count);

    py::class_<BracketSpec>(m, "BracketSpec")
        .def(py::init<>())
        .def_readwrite("lambda_lo", &BracketSpec::lambda_lo)
        .def_readwrite("lambda_hi", &BracketSpec::lambda_hi)
        .def_readwrite("tol", &BracketSpec::tol);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("q_a", &ScenarioConfig::q_a)
        .def_readwrite("q_b", &ScenarioConfig::q_b)
        .def_readwrite("barrier_height", &ScenarioConfig::barrier_height)
        .def_readwrite("barrier_stiffness", &ScenarioConfig::barrier_stiffness)
        .def_readwrite("v_a", &ScenarioConfig::v_a)
        .def_readwrite("q_c", &ScenarioConfig::q_c)
        .def_readwrite("v_c", &ScenarioConfig::v_c)
        .def_readwrite("mass", &ScenarioConfig::mass)
        .def_readwrite("friction", &ScenarioConfig::friction)
        .def_readwrite("mode", &ScenarioConfig::mode)
        .def_readwrite("controls", &ScenarioConfig::controls)
        .def_readwrite("asym_window", &ScenarioConfig::asym_window)
        .def_readwrite("asym_tol", &ScenarioConfig::asym_tol)
        .def_readwrite("momentum_mev_c", &ScenarioConfig::momentum_mev_c)
        .def_readwrite("sweep", &ScenarioConfig::sweep)
        .def_readwrite("bracket", &ScenarioConfig::bracket)
        .def_readwrite("out_dir", &ScenarioConfig::out_dir)
        .def("make_potential", &ScenarioConfig::make_potential)
        .def("three_segments", &ScenarioConfig::three_segments);

    py::class_<DiffusionTriple>(m, "DiffusionTriple")
        .def(py::init<>())
        .def_readwrite("d_qq", &DiffusionTriple::d_qq)
        .def_readwrite("d_pp", &DiffusionTriple::d_pp)
        .def_readwrite("d_pq", &DiffusionTriple::d_pq);

    m.def("rwa_diffusion", &rwa_diffusion, py::arg("lambda_"), py::arg("mass"),
          py::arg("well_stiffness"), py::arg("hbar") = units::hbar);
    m.def("make_params", &make_params);
    m.def("initial_state", &initial_state);

    py::enum_<Classification>(m, "Classification")
        .value("escaped", Classification::escaped)
        .value("trapped", Classification::trapped)
        .value("settled_right", Classification::settled_right)
        .value("oscillating", Classification::oscillating);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("series", &Trajectory::series)
        .def_readonly("prob", &Trajectory::prob)
        .def_readonly("rate", &Trajectory::rate)
        .def_readonly("classification", &Trajectory::classification)
        .def_readonly("lambda_", &Trajectory::lambda);

    m.def("run_scenario", &run_scenario);

    py::class_<AsymptoteResult>(m, "AsymptoteResult")
        .def_readonly("p_inf", &AsymptoteResult::p_inf)
        .def_readonly("t90", &AsymptoteResult::t90);
    m.def("asymptote",
          py::overload_cast<const Trajectory&, double, double>(&asymptote),
          py::arg("trajectory"), py::arg("window") = 20.0, py::arg("tol") = 1e-4);

    py::class_<CriticalResult>(m, "CriticalResult")
        .def_readonly("lambda_cr", &CriticalResult::lambda_cr)
        .def_readonly("bracket_lo", &CriticalResult::bracket_lo)
        .def_readonly("bracket_hi", &CriticalResult::bracket_hi)
        .def_readonly("monotone_ok", &CriticalResult::monotone_ok);
    m.def("critical_lambda", &critical_lambda, py::arg("config"), py::arg("lambda_lo"),
          py::arg("lambda_hi"), py::arg("tol") = 1e-4);

    py::class_<SweepEntry>(m, "SweepEntry")
        .def_readonly("lambda_", &SweepEntry::lambda)
        .def_readonly("p_inf", &SweepEntry::p_inf)
        .def_readonly("t90", &SweepEntry::t90)
        .def_readonly("classification", &SweepEntry::classification)
        .def_readonly("error", &SweepEntry::error);
    py::class_<SweepResult>(m, "SweepResult").def_readonly("entries", &SweepResult::entries);
    m.def("friction_sweep", &friction_sweep, py::arg("config"), py::arg("lambdas"),
          py::arg("threads") = 1);

    py::enum_<ExpectationTag>(m, "ExpectationTag")
        .value("slope", ExpectationTag::slope)
        .value("curvature", ExpectationTag::curvature);
    m.def("quadrature_expectation", &quadrature_expectation);
    m.def("flux_quadrature", &flux_quadrature);
    m.def("tail_quadrature", &tail_quadrature);
    m.def("reference_rhs", &reference_rhs);

    py::class_<LangevinRow>(m, "LangevinRow")
        .def_readonly("t", &LangevinRow::t)
        .def_readonly("mean_q", &LangevinRow::mean_q)
        .def_readonly("mean_p", &LangevinRow::mean_p)
        .def_readonly("cov_qq", &LangevinRow::cov_qq)
        .def_readonly("cov_pp", &LangevinRow::cov_pp)
        .def_readonly("cov_pq", &LangevinRow::cov_pq)
        .def_readonly("se_mean_q", &LangevinRow::se_mean_q)
        .def_readonly("se_mean_p", &LangevinRow::se_mean_p)
        .def_readonly("se_cov_qq", &LangevinRow::se_cov_qq)
        .def_readonly("se_cov_pp", &LangevinRow::se_cov_pp)
        .def_readonly("se_cov_pq", &LangevinRow::se_cov_pq);
    py::class_<LangevinStats>(m, "LangevinStats").def_readonly("rows", &LangevinStats::rows);
    m.def("langevin_sample", &langevin_sample, py::arg("segment"), py::arg("params"),
          py::arg("initial"), py::arg("dt"), py::arg("t_end"), py::arg("n"), py::arg("seed"),
          py::arg("output_dt") = 1.0);

    m.def("parse_config", &parse_config);
    m.def("parse_config_text", &parse_config_text);
    m.def("validate_config", &validate_config);
    m.def("effective_config", &effective_config);
    m.def("trajectory_csv", &trajectory_csv);
    m.def("sweep_csv", &sweep_csv);
}
