#include "mflab/kernel.hpp"

#include "mflab/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <iostream>
#include <sstream>

namespace mflab {

JumpKernel::JumpKernel(FiniteSpace space_, Mat lam_)
    : space(std::move(space_)), lam(std::move(lam_)) {
    if (lam.rows() != space.d || lam.cols() != space.d)
        throw std::invalid_argument("JumpKernel: dimension mismatch");
    for (int x = 0; x < space.d; ++x) {
        for (int y = 0; y < space.d; ++y) {
            if (lam(x, y) < 0.0) throw std::invalid_argument("JumpKernel: negative mass");
        }
        if (lam(x, x) != 0.0) {
            if (!diagonal_was_zeroed) {
                std::cerr << "warning: JumpKernel diagonal entries zeroed\n";
                diagonal_was_zeroed = true;
            }
            lam(x, x) = 0.0;
        }
    }
}

double JumpKernel::j_norm() const {
    return space.d == 0 ? 0.0 : lam.rowwise().sum().maxCoeff();
}

JumpKernel adjoint_kernel(const JumpKernel& k) {
    const int d = k.space.d;
    Mat adj(d, d);
    // Lambda*(y,{x}) = Lambda(x,{y}) nu[x] / nu[y]
    for (int y = 0; y < d; ++y)
        for (int x = 0; x < d; ++x)
            adj(y, x) = k.lam(x, y) * k.space.nu[x] / k.space.nu[y];
    return JumpKernel(k.space, adj);
}

Vec jump_gen_apply(const JumpKernel& k, const Vec& phi) {
    if (phi.size() != k.space.d) throw std::invalid_argument("jump_gen_apply: dimension mismatch");
    return k.lam * phi - k.row_sums().cwiseProduct(phi);
}

Vec adjoint_gen_apply(const JumpKernel& k, const JumpKernel& kadj, const Vec& rho) {
    if (rho.size() != k.space.d)
        throw std::invalid_argument("adjoint_gen_apply: dimension mismatch");
    return kadj.lam * rho - k.row_sums().cwiseProduct(rho);
}

Vec adjoint_gen_apply(const JumpKernel& k, const Vec& rho) {
    return adjoint_gen_apply(k, adjoint_kernel(k), rho);
}

double kernel_distance(const JumpKernel& a, const JumpKernel& b) {
    if (!(a.space == b.space)) throw std::invalid_argument("kernel_distance: space mismatch");
    return (a.lam - b.lam).cwiseAbs().rowwise().sum().maxCoeff();
}

Mat adjoint_gen_matrix(const JumpKernel& k) {
    Mat m = adjoint_kernel(k).lam;
    m.diagonal() -= k.row_sums();
    return m;
}

double op_norm_l1(const Mat& m, const FiniteSpace& space) {
    // unit atom densities e_x / nu[x]; ||M e_x/nu[x]||_L1 = sum_y |M(y,x)| nu[y] / nu[x]
    double best = 0.0;
    for (int x = 0; x < space.d; ++x) {
        double s = 0.0;
        for (int y = 0; y < space.d; ++y) s += std::abs(m(y, x)) * space.nu[y];
        best = std::max(best, s / space.nu[x]);
    }
    return best;
}

double op_norm_linf(const Mat& m) {
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

AdjointOpBoundReport adjoint_op_bound_check(const JumpKernel& a, const JumpKernel& b,
                                            const Density& rho) {
    const FiniteSpace& sp = a.space;
    Vec da = adjoint_gen_apply(a, rho.w);
    Vec db = adjoint_gen_apply(b, rho.w);
    AdjointOpBoundReport r{};
    r.lhs = ((da - db).cwiseAbs().array() * sp.nu.array()).sum();
    double mid = 0.0;
    for (int x = 0; x < sp.d; ++x) {
        double tv = (a.lam.row(x) - b.lam.row(x)).cwiseAbs().sum();
        mid += tv * std::abs(rho.w[x]) * sp.nu[x];
    }
    r.middle = 2.0 * mid;
    double l1 = (rho.w.cwiseAbs().array() * sp.nu.array()).sum();
    r.rhs = 2.0 * kernel_distance(a, b) * l1;
    const double tol = 1e-10 * (1.0 + r.rhs);
    r.holds = r.lhs <= r.middle + tol && r.middle <= r.rhs + tol;
    return r;
}

RateGenerator::RateGenerator(FiniteSpace space_, Mat q_)
    : space(std::move(space_)), q(std::move(q_)) {
    const int d = space.d;
    if (q.rows() != d || q.cols() != d) throw std::invalid_argument("RateGenerator: dimension mismatch");
    for (int x = 0; x < d; ++x) {
        double off = 0.0;
        for (int y = 0; y < d; ++y) {
            if (y == x) continue;
            if (q(x, y) < 0.0) throw std::invalid_argument("RateGenerator: negative off-diagonal rate");
            off += q(x, y);
        }
        if (std::abs(q(x, x) + off) > 1e-9 * (1.0 + off))
            throw std::invalid_argument("RateGenerator: rows must sum to zero");
        q(x, x) = -off;  // enforce exactly
    }
    kstar.resize(d, d);
    for (int y = 0; y < d; ++y)
        for (int x = 0; x < d; ++x)
            kstar(y, x) = q(x, y) * space.nu[x] / space.nu[y];
}

double RateGenerator::growth_constant() const {
    return (kstar * Vec::Ones(space.d)).cwiseAbs().maxCoeff();
}

Density resolvent_smooth(const RateGenerator& g, const Density& rho, double lambda) {
    const int d = g.space.d;
    Mat a = lambda * Mat::Identity(d, d) - g.kstar;
    Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible()) throw std::runtime_error("resolvent_smooth: singular system");
    Vec w = lambda * lu.solve(rho.w);
    return Density(g.space, w.cwiseMax(0.0));
}

AdjointMarkovDiagnostics validate_adjoint_markov(const Mat& m, const FiniteSpace& space,
                                                 int random_trials, std::uint64_t seed) {
    AdjointMarkovDiagnostics diag;
    const int d = space.d;
    const double tol = 1e-9 * (1.0 + m.cwiseAbs().maxCoeff());
    auto record = [&](const std::string& s) {
        diag.valid = false;
        diag.violations.push_back(s);
    };
    // mass conservation on basis densities
    for (int x = 0; x < d; ++x) {
        Vec rho = Vec::Zero(d);
        rho[x] = 1.0 / space.nu[x];
        double mass = ((m * rho).array() * space.nu.array()).sum();
        if (std::abs(mass) > tol) {
            std::ostringstream os;
            os << "mass not conserved on basis atom " << x << " (defect " << mass << ")";
            record(os.str());
        }
    }
    // positive maximum principle on indicator-supported densities
    auto pmp = [&](const Vec& rho, const std::string& label) {
        Vec out = m * rho;
        double s = 0.0;
        for (int x = 0; x < d; ++x)
            if (rho[x] > 0.0) s += out[x] * space.nu[x];
        if (s > tol) record("maximum principle violated on " + label);
    };
    if (d <= 16) {
        for (unsigned mask = 1; mask < (1u << d); ++mask) {
            Vec rho = Vec::Zero(d);
            for (int x = 0; x < d; ++x)
                if (mask & (1u << x)) rho[x] = 1.0;
            pmp(rho, "indicator subset " + std::to_string(mask));
        }
    }
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < random_trials; ++t) {
        Vec rho(d);
        for (int x = 0; x < d; ++x) rho[x] = u(rng) < 0.5 ? 0.0 : u(rng);
        if (rho.maxCoeff() <= 0.0) rho[0] = 1.0;
        pmp(rho, "random density " + std::to_string(t));
    }
    return diag;
}

Mat expm(const Mat& a) { return a.exp(); }

}  // namespace mflab
