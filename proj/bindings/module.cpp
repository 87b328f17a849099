#include "mflab/config.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mflab;

namespace {

Json parse_json(const std::string& text) { return Json::parse(text); }

}  // namespace

PYBIND11_MODULE(_mflab, m) {
    m.doc() = "mean-field jump process laboratory";

    py::class_<FiniteSpace>(m, "FiniteSpace")
        .def(py::init<int, Vec>(), py::arg("d"), py::arg("nu"))
        .def_static("uniform", &FiniteSpace::uniform, py::arg("d"), py::arg("weight") = 1.0)
        .def_readonly("d", &FiniteSpace::d)
        .def_readonly("nu", &FiniteSpace::nu)
        .def("nu_total", &FiniteSpace::nu_total);

    py::class_<Density>(m, "Density")
        .def(py::init<FiniteSpace, Vec, bool>(), py::arg("space"), py::arg("w"),
             py::arg("require_probability") = false)
        .def_static("uniform", &Density::uniform)
        .def_static("delta", &Density::delta)
        .def_readonly("w", &Density::w)
        .def_readonly("space", &Density::space)
        .def("mass", &Density::mass)
        .def("masses", &Density::masses);

    py::class_<EmpiricalMeasure>(m, "EmpiricalMeasure")
        .def(py::init<FiniteSpace, IVec>(), py::arg("space"), py::arg("counts"))
        .def_readonly("counts", &EmpiricalMeasure::counts)
        .def_readonly("n", &EmpiricalMeasure::n)
        .def("masses", &EmpiricalMeasure::masses);

    py::class_<JumpKernel>(m, "JumpKernel")
        .def(py::init<FiniteSpace, Mat>(), py::arg("space"), py::arg("lam"))
        .def_readonly("lam", &JumpKernel::lam)
        .def("j_norm", &JumpKernel::j_norm)
        .def("row_sums", &JumpKernel::row_sums);

    m.def("adjoint_kernel", &adjoint_kernel);
    m.def("jump_gen_apply", &jump_gen_apply);
    m.def("adjoint_gen_apply",
          py::overload_cast<const JumpKernel&, const Vec&>(&adjoint_gen_apply));
    m.def("kernel_distance", &kernel_distance);
    m.def("adjoint_gen_matrix", &adjoint_gen_matrix);
    m.def("op_norm_l1", &op_norm_l1);
    m.def("op_norm_linf", &op_norm_linf);
    m.def("oscillation", &oscillation);
    m.def("expm", &expm);

    py::class_<RateGenerator>(m, "RateGenerator")
        .def(py::init<FiniteSpace, Mat>(), py::arg("space"), py::arg("q"))
        .def_readonly("q", &RateGenerator::q)
        .def_readonly("kstar", &RateGenerator::kstar)
        .def("growth_constant", &RateGenerator::growth_constant);

    m.def("resolvent_smooth", &resolvent_smooth);

    py::class_<MeanFieldKernel, std::shared_ptr<MeanFieldKernel>>(m, "MeanFieldKernel")
        .def("eval", &MeanFieldKernel::eval)
        .def("eval_at_empirical", &MeanFieldKernel::eval_at_empirical)
        .def("xi", &MeanFieldKernel::xi);

    m.def(
        "kernel_from_json",
        [](const std::string& text, const FiniteSpace& sp) {
            return parse_kernel(parse_json(text), sp);
        },
        py::arg("json_text"), py::arg("space"));
    m.def("space_from_json",
          [](const std::string& text) { return parse_space(parse_json(text)); });
    m.def(
        "generator_from_json",
        [](const std::string& text, const FiniteSpace& sp) {
            return parse_generator(parse_json(text), sp);
        },
        py::arg("json_text"), py::arg("space"));
    m.def(
        "density_from_json",
        [](const std::string& text, const FiniteSpace& sp) {
            return parse_density(parse_json(text), sp);
        },
        py::arg("json_text"), py::arg("space"));

    m.def("averaged_kernel", &averaged_kernel, py::arg("kern"), py::arg("rho"), py::arg("N"),
          py::arg("allow_monte_carlo") = true, py::arg("mc_samples") = 100000,
          py::arg("seed") = 2024, py::arg("mc_threshold") = 100000);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("theta_hat", &SweepResult::theta_hat);
    m.def("verify_A3", &verify_A3, py::arg("kern"), py::arg("N"), py::arg("exhaustive") = true,
          py::arg("samples") = 2000, py::arg("seed") = 7, py::arg("cap") = 10000000);
    m.def("verify_A4", &verify_A4, py::arg("kern"), py::arg("N"), py::arg("exhaustive") = true,
          py::arg("samples") = 2000, py::arg("seed") = 7, py::arg("cap") = 10000000);

    py::class_<MonteCarloEstimate>(m, "MonteCarloEstimate")
        .def_readonly("estimate", &MonteCarloEstimate::estimate)
        .def_readonly("std_error", &MonteCarloEstimate::std_error)
        .def_readonly("samples", &MonteCarloEstimate::samples);
    m.def("epsilon_N", &epsilon_N, py::arg("kern"), py::arg("rho"), py::arg("N"),
          py::arg("samples"), py::arg("seed"));

    py::class_<IntensityBounds>(m, "IntensityBounds")
        .def_readonly("M_lambda_hat", &IntensityBounds::M_lambda_hat)
        .def_readonly("M_lambda_star_hat", &IntensityBounds::M_lambda_star_hat);
    m.def("intensity_sweep", &intensity_sweep, py::arg("kern"), py::arg("N"),
          py::arg("samples") = 1000, py::arg("seed") = 99);

    m.def(
        "solve_meanfield",
        [](const RateGenerator& g, std::shared_ptr<MeanFieldKernel> kern, const Density& rho0,
           double t_end, double dt) {
            EvolutionProblem p;
            p.g = g;
            p.kern = kern;
            p.rho0 = rho0;
            p.t_end = t_end;
            p.dt = dt;
            SolutionTrace tr = solve(p);
            Mat w(tr.times.size(), rho0.space.d);
            for (std::size_t i = 0; i < tr.times.size(); ++i) w.row(i) = tr.densities[i].w;
            return py::make_tuple(tr.times, w);
        },
        py::arg("g"), py::arg("kern"), py::arg("rho0"), py::arg("t_end"), py::arg("dt") = 1e-3);

    m.def(
        "solve_averaged",
        [](const RateGenerator& g, std::shared_ptr<MeanFieldKernel> kern, const Density& rho0,
           int N, double t_end, double dt) {
            EvolutionProblem p;
            p.g = g;
            p.kern = kern;
            p.mode = EvolMode::averaged;
            p.N = N;
            p.rho0 = rho0;
            p.t_end = t_end;
            p.dt = dt;
            SolutionTrace tr = solve(p);
            Mat w(tr.times.size(), rho0.space.d);
            for (std::size_t i = 0; i < tr.times.size(); ++i) w.row(i) = tr.densities[i].w;
            return py::make_tuple(tr.times, w);
        },
        py::arg("g"), py::arg("kern"), py::arg("rho0"), py::arg("N"), py::arg("t_end"),
        py::arg("dt") = 1e-3);

    py::class_<MasterEquation>(m, "MasterEquation")
        .def_readonly("N", &MasterEquation::N)
        .def_readonly("D", &MasterEquation::D)
        .def_readonly("nu_prod", &MasterEquation::nu_prod);
    m.def("master_state_cap", &master_state_cap);
    m.def("build_master_equation", &build_master_equation, py::arg("g"), py::arg("kern"),
          py::arg("N"), py::arg("cap") = -1);
    m.def("solve_master", &solve_master, py::arg("me"), py::arg("rho0"), py::arg("t"),
          py::arg("dt") = 1e-3);
    m.def("tensorize", &tensorize);
    m.def("master_marginal", &master_marginal, py::arg("me"), py::arg("rhoN"), py::arg("site"));
    m.def("simulate_marginal", &simulate_marginal, py::arg("g"), py::arg("kern"), py::arg("N"),
          py::arg("rho0"), py::arg("t_end"), py::arg("replicas"), py::arg("seed"));

    m.def("product_space", &product_space);
    m.def("tensor_density", &tensor_density);
    m.def("relative_entropy", &relative_entropy);
    m.def("renormalized_entropy", &renormalized_entropy);
    m.def("marginal", &marginal);

    py::class_<InequalityCheck>(m, "InequalityCheck")
        .def_readonly("lhs", &InequalityCheck::lhs)
        .def_readonly("rhs", &InequalityCheck::rhs)
        .def_readonly("holds", &InequalityCheck::holds);
    m.def("pinsker_check", &pinsker_check);
    m.def("gibbs_check", &gibbs_check);
    m.def("gibbs_optimizer", &gibbs_optimizer);

    py::class_<DataProcessingReport>(m, "DataProcessingReport")
        .def_readonly("before", &DataProcessingReport::before)
        .def_readonly("after", &DataProcessingReport::after)
        .def_readonly("holds", &DataProcessingReport::holds)
        .def_readonly("jensen_worst", &DataProcessingReport::jensen_worst);
    m.def("data_processing_check", &data_processing_check);

    m.def("universal_b", &universal_b);
    py::class_<BetaConstants>(m, "BetaConstants")
        .def_readonly("M", &BetaConstants::M)
        .def_readonly("B_T", &BetaConstants::B_T)
        .def_readonly("C_T", &BetaConstants::C_T)
        .def_readonly("b", &BetaConstants::b)
        .def_readonly("beta", &BetaConstants::beta);
    m.def("assemble_beta", &assemble_beta, py::arg("M_K"), py::arg("M_lambda"),
          py::arg("M_lambda_star"), py::arg("theta"), py::arg("delta0"), py::arg("T"),
          py::arg("phi0_symmetric_variant") = false);

    py::class_<EntropyTrace>(m, "EntropyTrace")
        .def_readonly("N", &EntropyTrace::N)
        .def_readonly("times", &EntropyTrace::times)
        .def_readonly("W", &EntropyTrace::W)
        .def_readonly("bound", &EntropyTrace::bound)
        .def_readonly("sup_W", &EntropyTrace::sup_W)
        .def_readonly("sup_NW", &EntropyTrace::sup_NW)
        .def_readonly("bound_ok", &EntropyTrace::bound_ok)
        .def_readonly("within_tolerance", &EntropyTrace::within_tolerance);
    py::class_<ChaosExperimentResult>(m, "ChaosExperimentResult")
        .def_readonly("per_N", &ChaosExperimentResult::per_N)
        .def_readonly("all_ok", &ChaosExperimentResult::all_ok);
    m.def(
        "chaos_experiment",
        [](const RateGenerator& g, std::shared_ptr<MeanFieldKernel> kern, const Density& rho0,
           const std::vector<int>& N_list, double T, double dt, bool variant) {
            return chaos_experiment(g, *kern, rho0, N_list, T, dt, nullptr, variant);
        },
        py::arg("g"), py::arg("kern"), py::arg("rho0"), py::arg("N_list"), py::arg("T"),
        py::arg("dt") = 1e-3, py::arg("phi0_symmetric_variant") = false);

    py::class_<ChaosGapReport>(m, "ChaosGapReport")
        .def_readonly("l1_gap", &ChaosGapReport::l1_gap)
        .def_readonly("bound", &ChaosGapReport::bound)
        .def_readonly("eps_sup", &ChaosGapReport::eps_sup)
        .def_readonly("holds", &ChaosGapReport::holds);
    m.def(
        "averaged_vs_meanfield",
        [](std::shared_ptr<MeanFieldKernel> kern, const RateGenerator& g, const Density& rho0,
           int N, double t, double dt, int eps_samples, std::uint64_t seed) {
            return averaged_vs_meanfield(*kern, g, rho0, N, t, dt, eps_samples, seed);
        },
        py::arg("kern"), py::arg("g"), py::arg("rho0"), py::arg("N"), py::arg("t"),
        py::arg("dt") = 1e-3, py::arg("eps_samples") = 20000, py::arg("seed") = 31);

    py::class_<StabilityReport>(m, "StabilityReport")
        .def_readonly("holds", &StabilityReport::holds)
        .def_readonly("max_violation", &StabilityReport::max_violation)
        .def_readonly("M_T", &StabilityReport::M_T)
        .def_readonly("C_T", &StabilityReport::C_T);
    m.def("stability_check", &stability_check, py::arg("g"), py::arg("curve_a"),
          py::arg("curve_b"), py::arg("rho0"), py::arg("sigma0"), py::arg("t_end"),
          py::arg("dt") = 1e-3);

    py::class_<PhiFunction>(m, "PhiFunction")
        .def_readonly("N", &PhiFunction::N)
        .def("eval", [](const PhiFunction& p, int x, const IVec& counts) {
            return p.eval(x, counts);
        });
    m.def("build_phi_from_dynamics", &build_phi_from_dynamics,
          py::arg("kern"), py::arg("rhobar"), py::arg("N"));
    m.def("compensator", &compensator, py::arg("phi"), py::arg("rho"),
          py::arg("cap") = 10000000);

    py::class_<DiffOpsReport>(m, "DiffOpsReport")
        .def_readonly("d1_max", &DiffOpsReport::d1_max)
        .def_readonly("hess_hs_max", &DiffOpsReport::hess_hs_max);
    m.def("diff_ops", &diff_ops, py::arg("phi"), py::arg("rho"), py::arg("cap") = -1);

    py::class_<PhiConditionReport>(m, "PhiConditionReport")
        .def_readonly("c0", &PhiConditionReport::c0)
        .def_readonly("c1_defect", &PhiConditionReport::c1_defect)
        .def_readonly("c2", &PhiConditionReport::c2)
        .def_readonly("c3", &PhiConditionReport::c3)
        .def("C_hat", &PhiConditionReport::C_hat);
    m.def("verify_phi_conditions", &verify_phi_conditions, py::arg("phi"), py::arg("rho"),
          py::arg("exhaustive") = true, py::arg("samples") = 500, py::arg("seed") = 5,
          py::arg("cap") = 10000000);

    py::class_<ConcentrationReport>(m, "ConcentrationReport")
        .def_readonly("C", &ConcentrationReport::C)
        .def_readonly("b", &ConcentrationReport::b)
        .def_readonly("exact_available", &ConcentrationReport::exact_available)
        .def_readonly("exact_value", &ConcentrationReport::exact_value)
        .def_readonly("moment_estimate", &ConcentrationReport::moment_estimate)
        .def_readonly("std_error", &ConcentrationReport::std_error)
        .def_readonly("median_of_means", &ConcentrationReport::median_of_means)
        .def_readonly("pass_", &ConcentrationReport::pass)
        .def_property_readonly("ok", [](const ConcentrationReport& r) { return r.pass; });
    m.def("concentration_test", &concentration_test, py::arg("phi"), py::arg("rho"),
          py::arg("samples"), py::arg("seed"), py::arg("C_declared") = std::optional<double>{},
          py::arg("cap") = -1);
}
