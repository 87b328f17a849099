#pragma once

#include "mflab/entropy.hpp"

namespace mflab {

/// Function Phi(x, mu) of an atom and an empirical measure of N-1 particles.
struct PhiFunction {
    FiniteSpace space;
    int N = 0;
    std::function<double(int x, const IVec& counts)> eval;  // counts sum to N-1
    std::optional<double> constant_C;
};

/// Phi(x, mu) = (Lambda*(mu) rho)(x) / rho(x) - Lambda(x, Pi; mu);
/// centered against rho by construction.
PhiFunction build_phi_from_dynamics(const MeanFieldKernel& kern, const Density& rhobar, int N);

/// Exact expectation of Phi(x, empirical of N-1 iid rho-samples), per atom.
Vec compensator(const PhiFunction& phi, const Density& rho, std::uint64_t cap = 10000000);

/// F(x) = sum_k [Phi(x_k, mu(x_{-k})) - Phibar(x_k)]
double big_f(const PhiFunction& phi, const Vec& phibar, const std::vector<int>& config);

struct DiffOpsReport {
    double d1_max = 0.0;       // max_i max_x d_i F
    double hess_hs_max = 0.0;  // max_x || d^(2) F ||_HS
};
/// Exhaustive difference-operator norms of F tabulated over Pi^N.
DiffOpsReport diff_ops(const PhiFunction& phi, const Density& rho, std::int64_t cap = -1);

struct PhiConditionReport {
    double c0 = 0.0;  // sup_{mu,x,x'} |Phi(x,mu) - Phi(x',mu)|
    double c1_defect = 0.0;  // max centering defect
    double c2 = 0.0;  // (N-1)-scaled first-order sup
    double c3 = 0.0;  // (N-1)(N-2)-scaled second-order sup
    double C_hat() const { return std::max(c0, std::max(c2, c3)); }
};
PhiConditionReport verify_phi_conditions(const PhiFunction& phi, const Density& rho,
                                         bool exhaustive = true, int samples = 500,
                                         std::uint64_t seed = 5,
                                         std::uint64_t cap = 10000000);

struct ConcentrationReport {
    double C = 0.0;
    double b = 0.0;
    bool exact_available = false;
    double exact_value = 0.0;       // full-enumeration E[exp((b/C)|F|)]
    double moment_estimate = 0.0;   // Monte Carlo mean
    double std_error = 0.0;
    double median_of_means = 0.0;   // 16-bucket estimate
    int samples = 0;
    std::uint64_t seed = 0;
    bool pass = false;
};
/// Exponential-moment verdict: exact enumeration when d^N fits the state cap,
/// Monte Carlo (mean and median-of-means, both must pass) otherwise.
ConcentrationReport concentration_test(const PhiFunction& phi, const Density& rho, int samples,
                                       std::uint64_t seed, std::optional<double> C_declared = {},
                                       std::int64_t cap = -1);

}  // namespace mflab
