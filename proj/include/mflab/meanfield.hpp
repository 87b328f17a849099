#pragma once

#include "mflab/kernel.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace mflab {

struct MeanFieldConstants {
    std::optional<double> M_lambda;        // uniform intensity bound
    std::optional<double> M_lambda_star;   // uniform adjoint intensity bound
    std::optional<double> theta;           // first/second-order bounded-difference constant
    std::optional<double> lipschitz_L1;    // TV-Lipschitz constant of mu -> Lambda(mu)
};

/// Contract: maps a probability measure on Pi (given by atom masses) to a
/// jump kernel. Evaluation must be deterministic and depend on the measure
/// only. Empirical measures may be routed through a separate finite-N rule.
class MeanFieldKernel {
public:
    explicit MeanFieldKernel(FiniteSpace space) : space_(std::move(space)) {}
    virtual ~MeanFieldKernel() = default;

    const FiniteSpace& space() const { return space_; }

    virtual JumpKernel eval(const Vec& masses) const = 0;

    /// Finite-N evaluation at an empirical measure (counts of N-1 particles).
    /// Defaults to eval on the probability masses.
    virtual JumpKernel eval_at_empirical(const EmpiricalMeasure& mu) const {
        return eval(mu.masses());
    }

    /// Continuity modulus Xi(x, mu, rho): defaults to the TV distance of the
    /// x-rows, the tightest admissible choice.
    virtual double xi(int x, const EmpiricalMeasure& mu, const Density& rho) const;

    MeanFieldConstants constants;

protected:
    FiniteSpace space_;
};

/// Kernel independent of the measure.
class ConstantKernel : public MeanFieldKernel {
public:
    ConstantKernel(FiniteSpace space, Mat lam);
    JumpKernel eval(const Vec&) const override { return kernel_; }

private:
    JumpKernel kernel_;
};

/// Affine-in-mu kernel lam(x,y; mu) = base(x,y) + sum_z mu({z}) slope[z](x,y);
/// useful as the exactness witness for averaging (averaging commutes with
/// affine maps) and for second-difference degeneracy tests.
class AffineKernel : public MeanFieldKernel {
public:
    AffineKernel(FiniteSpace space, Mat base, std::vector<Mat> slope);
    JumpKernel eval(const Vec& masses) const override;

private:
    Mat base_;
    std::vector<Mat> slope_;
};

/// Two/three-body interaction family evaluated at empirical measures of
/// N-1 particles:
///   (1/(N-1)) sum_k G1(x, z_k, y) + (1/((N-1)(N-2))) sum_{k != l} G2(x, z_k, z_l, y).
/// At general probability measures the N-free averaged closed form
/// int G1 dmu + int int G2 dmu dmu is used.
class TwoThreeBodyKernel : public MeanFieldKernel {
public:
    /// gamma1: flat d*d*d tensor, index (x, z, y); gamma2: flat d^4, (x, z, zp, y).
    TwoThreeBodyKernel(FiniteSpace space, std::vector<double> gamma1,
                       std::vector<double> gamma2, double c1);

    JumpKernel eval(const Vec& masses) const override;
    JumpKernel eval_at_empirical(const EmpiricalMeasure& mu) const override;

    double g1(int x, int z, int y) const { return gamma1_[(x * d_ + z) * d_ + y]; }
    double g2(int x, int z, int zp, int y) const {
        return gamma2_[((x * d_ + z) * d_ + zp) * d_ + y];
    }
    double c1() const { return c1_; }
    bool has_three_body() const { return has_three_; }

private:
    std::vector<double> gamma1_, gamma2_;
    double c1_;
    int d_;
    bool has_three_ = false;
};

/// Real-vector-parametrized family: lam(x,y; mu) = Gamma(x, (kappa*mu)(x), y) nu[y],
/// with (kappa*mu)(x) = sum_y kappa(x,y) mu({y}).
class ParametrizedKernel : public MeanFieldKernel {
public:
    using GammaFn = std::function<double(int x, const Vec& theta, int y)>;

    /// kappa: flat d*d*k tensor (x, y, component).
    ParametrizedKernel(FiniteSpace space, int k, std::vector<double> kappa, GammaFn gamma,
                       double m1, double m2, double m3);

    JumpKernel eval(const Vec& masses) const override;
    double xi(int x, const EmpiricalMeasure& mu, const Density& rho) const override;

    Vec kappa_conv(int x, const Vec& masses) const;
    const GammaFn& gamma() const { return gamma_; }
    double m1() const { return m1_; }

private:
    int k_;
    std::vector<double> kappa_;
    GammaFn gamma_;
    double m1_, m2_, m3_;
};

JumpKernel eval_two_three_body(const TwoThreeBodyKernel& kern, const EmpiricalMeasure& mu);
JumpKernel eval_parametrized(const ParametrizedKernel& kern, const Vec& masses);

/// Exact expectation of the empirical-measure kernel under rho^{(N-1)},
/// by composition enumeration; Monte Carlo fallback above `mc_threshold`
/// compositions when `allow_monte_carlo` is set.
JumpKernel averaged_kernel(const MeanFieldKernel& kern, const Density& rho, int N,
                           bool allow_monte_carlo = true, int mc_samples = 100000,
                           std::uint64_t seed = 2024,
                           std::uint64_t mc_threshold = 100000);

struct SweepResult {
    double theta_hat = 0.0;
    // witness: base counts plus the swap atoms attaining the sup
    IVec witness_counts;
    int witness_a = -1, witness_a2 = -1, witness_b = -1, witness_b2 = -1;
};

/// First-order bounded-difference sup:
/// max over (N-2)-particle bases and single swaps of (N-1)||Y(mu)-Y(mu')||_J
/// for Y in {Lambda, Lambda*}.
SweepResult verify_A3(const MeanFieldKernel& kern, int N, bool exhaustive = true,
                      int samples = 2000, std::uint64_t seed = 7,
                      std::uint64_t cap = 10000000);

/// Second-order bounded-difference sup with two swap positions, scaled by
/// (N-1)(N-2).
SweepResult verify_A4(const MeanFieldKernel& kern, int N, bool exhaustive = true,
                      int samples = 2000, std::uint64_t seed = 7,
                      std::uint64_t cap = 10000000);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    int samples = 0;
};

/// Monte Carlo estimate of eps_N(rho) = E[Xi(x_1, mu(x_{-1}), rho)] under rho^{(N)}.
MonteCarloEstimate epsilon_N(const MeanFieldKernel& kern, const Density& rho, int N,
                             int samples, std::uint64_t seed);

/// Empirical (A1p)/(A2p) sweep: max of ||Lambda(mu)||_J and ||Lambda*(mu)||_J
/// over sampled probability measures and empirical measures of N-1 particles.
struct IntensityBounds {
    double M_lambda_hat = 0.0;
    double M_lambda_star_hat = 0.0;
};
IntensityBounds intensity_sweep(const MeanFieldKernel& kern, int N, int samples = 1000,
                                std::uint64_t seed = 99);

}  // namespace mflab
