#pragma once

#include "mflab/space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mflab {

/// Markov jump kernel: nonnegative d x d mass matrix with zero diagonal,
/// lam(x,y) = Lambda(x,{y}).
struct JumpKernel {
    FiniteSpace space;
    Mat lam;

    JumpKernel() = default;
    /// Nonzero diagonal entries are zeroed (the jump generator never sees
    /// them); `diagonal_was_zeroed` records whether that happened.
    JumpKernel(FiniteSpace space_, Mat lam_);

    bool diagonal_was_zeroed = false;

    /// max_x Lambda(x, Pi) — the intensity (J-) norm.
    double j_norm() const;
    /// Lambda(x, Pi) per row.
    Vec row_sums() const { return lam.rowwise().sum(); }
};

JumpKernel adjoint_kernel(const JumpKernel& k);
/// (A phi)[x] = sum_y lam(x,y) (phi[y] - phi[x])
Vec jump_gen_apply(const JumpKernel& k, const Vec& phi);
/// (A* rho)[x] = sum_y lam*(x,y) rho[y] - Lambda(x,Pi) rho[x]
Vec adjoint_gen_apply(const JumpKernel& k, const JumpKernel& kadj, const Vec& rho);
Vec adjoint_gen_apply(const JumpKernel& k, const Vec& rho);
/// max-row-sum distance ||a - b||_J
double kernel_distance(const JumpKernel& a, const JumpKernel& b);

/// Dense matrix of the adjoint generator acting on density vectors:
/// A* rho = M rho.
Mat adjoint_gen_matrix(const JumpKernel& k);
/// Exact L1(nu)->L1(nu) operator norm by basis sweep over unit atom densities.
double op_norm_l1(const Mat& m, const FiniteSpace& space);
/// Exact Linf->Linf operator norm (max weighted absolute row sum).
double op_norm_linf(const Mat& m);

struct AdjointOpBoundReport {
    double lhs;           // ||A*_a rho - A*_b rho||_L1
    double middle;        // 2 * integral of rowwise TV distance against |rho|
    double rhs;           // 2 ||a-b||_J ||rho||_L1
    bool holds;
};
AdjointOpBoundReport adjoint_op_bound_check(const JumpKernel& a, const JumpKernel& b,
                                            const Density& rho);

/// Conservative rate generator: forward rate matrix q with zero row sums,
/// together with its L1(nu)-adjoint matrix acting on densities.
struct RateGenerator {
    FiniteSpace space;
    Mat q;
    Mat kstar;  // kstar(y,x) = q(x,y) nu[x] / nu[y]

    RateGenerator() = default;
    RateGenerator(FiniteSpace space_, Mat q_);

    /// M_K = ||K* 1||_inf
    double growth_constant() const;
};

/// Scaled resolvent I_lambda rho = lambda (lambda I - K*)^{-1} rho.
Density resolvent_smooth(const RateGenerator& g, const Density& rho, double lambda);

struct AdjointMarkovDiagnostics {
    bool valid = true;
    std::vector<std::string> violations;
};
/// Checks mass conservation on basis densities and the positive maximum
/// principle on all indicator densities plus a randomized suite.
AdjointMarkovDiagnostics validate_adjoint_markov(const Mat& m, const FiniteSpace& space,
                                                 int random_trials = 200,
                                                 std::uint64_t seed = 12345);

/// Matrix exponential (scaling-and-squaring Pade), oracle for semigroup claims.
Mat expm(const Mat& a);

}  // namespace mflab
