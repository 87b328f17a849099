#pragma once

#include "mflab/dynamics.hpp"

namespace mflab {

/// Product space (Pi^k, nu^{(k)}) flattened to atoms, little-endian indexing.
FiniteSpace product_space(const FiniteSpace& base, int k);
/// rho^{(k)} as a density on the product space.
Density tensor_density(const Density& rho, int k);

/// sum rho log(rho/sigma) d nu; +infinity when rho charges a sigma-null atom.
double relative_entropy(const Density& rho, const Density& sigma);
/// H/N on a product space.
double renormalized_entropy(const Density& rhoN, const Density& sigmaN, int N);

/// Integrates out the last N-k coordinates of a density on Pi^N.
Density marginal(const Density& rhoN, const FiniteSpace& base, int N, int k);

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};

InequalityCheck pinsker_check(const Density& rho, const Density& sigma);
InequalityCheck gibbs_check(const Vec& phi, const Density& rho, const Density& sigma, double eta);
/// Maximizer of the Gibbs functional: rho* proportional to sigma e^{phi/eta}.
Density gibbs_optimizer(const Vec& phi, const Density& sigma, double eta);

struct DataProcessingReport {
    double before = 0.0;
    double after = 0.0;
    bool holds = true;
    double jensen_worst = 0.0;  // max pointwise defect of the Jensen sub-check
};
/// t_op: matrix acting on density vectors (columns = images of atom densities),
/// must be positivity-preserving and mass-conserving.
DataProcessingReport data_processing_check(const Mat& t_op, const Density& rho,
                                           const Density& sigma);

struct IntegralInequalityReport {
    bool holds = true;
    bool sharp_holds = true;   // the explicit-integrand form
    double max_violation = 0.0;
    double budget = 0.0;
};
/// Evolves rho under curve_a and sigma under curve_b (shared K*), and checks
/// the entropy integral inequality on the grid with trapezoid quadrature.
IntegralInequalityReport integral_inequality_check(
    const RateGenerator& g, const std::function<JumpKernel(double)>& curve_a,
    const std::function<JumpKernel(double)>& curve_b, const Density& rho0, const Density& sigma0,
    double eta, double t_end, double dt);

struct BetaConstants {
    double M_K = 0.0;
    double M_lambda = 0.0;
    double M_lambda_star = 0.0;
    double theta = 0.0;
    double delta0 = 0.0;  // log-oscillation of the initial mean-field density
    double T = 0.0;
    double M = 0.0;    // M_K + M_lambda + M_lambda_star
    double B_T = 0.0;  // exp(delta0 + 2 M T)
    double C_T = 0.0;  // max{2 B_T M_lambda + M_lambda_star, theta (B_T + 1)}
    double b = 0.0;    // (1/11) (3/sqrt2 + (5/2) sqrt(3/2))^{-1}
    double beta = 0.0; // b / C_T

    /// When set, the first argument of the max uses 2(B_T M_lambda + M_lambda_star).
    bool phi0_symmetric_variant = false;
};

double universal_b();
BetaConstants assemble_beta(double M_K, double M_lambda, double M_lambda_star, double theta,
                            double delta0, double T, bool phi0_symmetric_variant = false);

struct EntropyTrace {
    int N = 0;
    std::vector<double> times;
    std::vector<double> W;       // renormalized entropy along the grid
    std::vector<double> bound;   // W(0) e^{beta t} + (log2/N)(e^{beta t}-1)/beta
    BetaConstants constants;
    double sup_W = 0.0;
    double sup_NW = 0.0;
    bool bound_ok = true;          // hard failures only (violation > 1e-6)
    bool within_tolerance = true;  // no violation beyond 1e-9
};

struct ChaosExperimentResult {
    std::vector<EntropyTrace> per_N;
    bool all_ok = true;
};

/// Headline experiment: for each N, solve the averaged mean-field flow,
/// tensorize, solve the exact master equation, and compare the renormalized
/// entropy to its Gronwall bound.
ChaosExperimentResult chaos_experiment(const RateGenerator& g, const MeanFieldKernel& kern,
                                       const Density& rho0bar, const std::vector<int>& N_list,
                                       double T, double dt,
                                       const Vec* rho0N = nullptr,
                                       bool phi0_symmetric_variant = false);

}  // namespace mflab
