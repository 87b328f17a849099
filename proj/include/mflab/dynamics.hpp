#pragma once

#include "mflab/meanfield.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>

namespace mflab {

using SpMat = Eigen::SparseMatrix<double>;

enum class EvolMode { meanfield, averaged, prescribed, linear };

/// Time-evolution problem d/dt rho = K* rho + A*(rho; drive):
///  - meanfield:  drive = rho itself through `kern`
///  - averaged:   drive = rho through the (N-1)-particle averaged kernel
///  - prescribed: drive = the given curve sigma_t
///  - linear:     frozen kernel (or frozen curve of kernels via `kernel_curve`)
struct EvolutionProblem {
    RateGenerator g;
    std::shared_ptr<const MeanFieldKernel> kern;  // meanfield / averaged / prescribed
    EvolMode mode = EvolMode::meanfield;
    int N = 0;  // averaged mode only
    Density rho0;
    double t_end = 1.0;
    double dt = 1e-3;

    std::function<Density(double)> sigma_curve;           // prescribed mode
    std::function<JumpKernel(double)> kernel_curve;       // linear mode (time-dependent)
    std::optional<JumpKernel> frozen_kernel;              // linear mode (autonomous)

    bool renormalize = true;       // project mass back to 1 each step
    bool certify_halving = true;   // re-run at dt/2 and compare at t_end
};

struct StepDiagnostics {
    double mass_defect = 0.0;
    double min_value = 0.0;
    double log_oscillation = 0.0;
};

struct SolutionTrace {
    std::vector<double> times;
    std::vector<Density> densities;
    std::vector<StepDiagnostics> diagnostics;

    const Density& back() const { return densities.back(); }
};

SolutionTrace solve(const EvolutionProblem& problem);

/// Raw fixed-step RK4 for a linear or prescribed-drive flow on density
/// vectors, without clamping or renormalization (comparison/stability work
/// on possibly non-probability data).
Vec integrate_linear(const std::function<Vec(double, const Vec&)>& rhs, Vec rho0, double t_end,
                     double dt);

/// Exact N-particle generator on the product space Pi^N, states indexed
/// base-d little-endian (coordinate 1 is the least significant digit).
struct MasterEquation {
    FiniteSpace space;   // single-particle space
    int N = 0;
    std::int64_t D = 0;  // d^N
    SpMat generator;     // acts on density vectors w.r.t. nu^{(N)}
    Vec nu_prod;         // product reference weights per configuration

    std::vector<int> decode(std::int64_t idx) const;
    std::int64_t encode(const std::vector<int>& config) const;
};

std::int64_t master_state_cap();  // default 20000, MFLAB_CAP_STATES overrides

MasterEquation build_master_equation(const RateGenerator& g, const MeanFieldKernel& kern, int N,
                                     std::int64_t cap = -1);

/// e^{t L*} rho0 by dense matrix exponential for D <= 2000, otherwise RK4
/// stepping with a halving check.
Vec solve_master(const MasterEquation& me, const Vec& rho0, double t, double dt = 1e-3);

/// rho0^{(N)} as a density vector on the product space.
Vec tensorize(const MasterEquation& me, const Density& rho);
/// Single-site marginal (site in 1..N) of a product-space density.
Density master_marginal(const MasterEquation& me, const Vec& rhoN, int site);

struct ParticleTrajectory {
    std::vector<double> event_times;
    std::vector<std::vector<int>> configs;  // configuration after each event; configs[0] initial
    std::uint64_t seed = 0;
};

ParticleTrajectory simulate_particles(const RateGenerator& g, const MeanFieldKernel& kern, int N,
                                      const Density& rho0, double t_end, std::uint64_t seed);

/// Final configuration frequencies of `replicas` independent runs.
Mat simulate_marginal(const RateGenerator& g, const MeanFieldKernel& kern, int N,
                      const Density& rho0, double t_end, int replicas, std::uint64_t seed);

struct ComparisonReport {
    bool ordered = true;
    double worst_gap = 0.0;  // most negative value of rho_t - sigma_t along the trace
};
ComparisonReport comparison_check(const RateGenerator& g,
                                  const std::function<JumpKernel(double)>& kernel_curve,
                                  const Vec& rho0, const Vec& sigma0, double t_end,
                                  double dt = 1e-3);

struct StabilityReport {
    bool holds = true;
    double max_violation = 0.0;
    double M_T = 0.0;  // sup_t ||A*_t||_{L1->L1}
    double C_T = 0.0;  // sup_t ||A*_t - B*_t||_{L1->L1}
    std::vector<double> lhs;  // ||rho_t - sigma_t||_{L1} on the grid
    std::vector<double> rhs;
};
StabilityReport stability_check(const RateGenerator& g,
                                const std::function<JumpKernel(double)>& curve_a,
                                const std::function<JumpKernel(double)>& curve_b,
                                const Density& rho0, const Density& sigma0, double t_end,
                                double dt = 1e-3);

struct ChaosGapReport {
    double l1_gap = 0.0;
    double bound = 0.0;
    double eps_sup = 0.0;
    bool holds = true;
};
ChaosGapReport averaged_vs_meanfield(const MeanFieldKernel& kern, const RateGenerator& g,
                                     const Density& rho0, int N, double t, double dt = 1e-3,
                                     int eps_samples = 20000, std::uint64_t seed = 31);

}  // namespace mflab
