// Acceptance gate: one line per criterion, exit 0 iff all pass.

#include "mflab/concentration.hpp"
#include "mflab/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

using namespace mflab;

namespace {

int failures = 0;

void report(int idx, const char* name, bool pass, double seconds) {
    std::printf("[%s] criterion %2d: %-58s (%.1fs)\n", pass ? "PASS" : "FAIL", idx, name,
                seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <typename F>
void criterion(int idx, const char* name, F&& body) {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    try {
        pass = body();
    } catch (const std::exception& e) {
        std::printf("       exception: %s\n", e.what());
        pass = false;
    }
    report(idx, name, pass,
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

FiniteSpace random_space(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> u(0.2, 2.0);
    Vec nu(d);
    for (int x = 0; x < d; ++x) nu[x] = u(rng);
    return FiniteSpace(d, nu);
}

JumpKernel random_jump(std::mt19937_64& rng, const FiniteSpace& sp, double hi = 1.0) {
    std::uniform_real_distribution<double> u(0.0, hi);
    Mat lam = Mat::Zero(sp.d, sp.d);
    for (int x = 0; x < sp.d; ++x)
        for (int y = 0; y < sp.d; ++y)
            if (x != y) lam(x, y) = u(rng);
    return JumpKernel(sp, lam);
}

RateGenerator random_generator(std::mt19937_64& rng, const FiniteSpace& sp, double hi = 1.5) {
    std::uniform_real_distribution<double> u(0.0, hi);
    Mat q = Mat::Zero(sp.d, sp.d);
    for (int x = 0; x < sp.d; ++x) {
        for (int y = 0; y < sp.d; ++y)
            if (x != y) q(x, y) = u(rng);
        q(x, x) = -q.row(x).sum();
    }
    return RateGenerator(sp, q);
}

Density random_density(std::mt19937_64& rng, const FiniteSpace& sp, double lo = 0.05) {
    std::uniform_real_distribution<double> u(lo, 1.0);
    Vec w(sp.d);
    for (int x = 0; x < sp.d; ++x) w[x] = u(rng);
    w /= w.dot(sp.nu);
    return Density(sp, w, true);
}

TwoThreeBodyKernel two_body_d2(const FiniteSpace& sp) {
    std::vector<double> g1(8, 0.0);
    g1[(0 * 2 + 0) * 2 + 1] = 0.4;
    g1[(0 * 2 + 1) * 2 + 1] = 0.9;
    g1[(1 * 2 + 0) * 2 + 0] = 0.7;
    g1[(1 * 2 + 1) * 2 + 0] = 0.2;
    return TwoThreeBodyKernel(sp, g1, std::vector<double>(16, 0.0), 1.0);
}

std::shared_ptr<ParametrizedKernel> parametrized_d2(const FiniteSpace& sp) {
    std::vector<double> kappa{1.0, -0.5, -0.3, 0.8};
    auto gamma = [](int x, const Vec& theta, int y) {
        double P = (x == y) ? 0.0 : 1.0;
        return 2.0 / (1.0 + std::exp(-(0.2 + 1.5 * theta[0]))) * P;
    };
    return std::make_shared<ParametrizedKernel>(sp, 1, kappa, gamma, 2.0, 0.75, 1.125);
}

bool c1_adjoint_duality() {
    auto rng = make_rng(1001);
    for (int trial = 0; trial < 500; ++trial) {
        int d = 2 + static_cast<int>(rng() % 7);
        FiniteSpace sp = random_space(rng, d);
        JumpKernel k = random_jump(rng, sp, 2.0);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Vec rho(d), phi(d);
        for (int x = 0; x < d; ++x) {
            rho[x] = u(rng) + 1.5;
            phi[x] = u(rng);
        }
        double lhs = pair_nu(rho, jump_gen_apply(k, phi), sp);
        double rhs = pair_nu(adjoint_gen_apply(k, rho), phi, sp);
        double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        if (std::abs(lhs - rhs) > 1e-12 * scale) return false;
    }
    return true;
}

bool c2_semigroup_validity() {
    auto rng = make_rng(1002);
    std::uniform_real_distribution<double> ut(0.1, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 2 + static_cast<int>(rng() % 3);
        FiniteSpace sp = random_space(rng, d);
        RateGenerator g = random_generator(rng, sp);
        double t = ut(rng);
        // single-particle semigroup
        Mat et = expm(Mat(t * g.kstar));
        for (int c = 0; c < d; ++c) {
            Vec img = et.col(c);  // image of the atom density at c
            if (img.minCoeff() < -1e-10) return false;
            if (std::abs(img.dot(sp.nu) - sp.nu[c]) > 1e-10 * std::max(1.0, sp.nu[c]))
                return false;
        }
        // N-particle semigroup
        int N = 2 + static_cast<int>(rng() % 3);
        std::int64_t D = 1;
        for (int k = 0; k < N; ++k) D *= d;
        if (D > 200) N = 2;
        JumpKernel lamk = random_jump(rng, sp);
        ConstantKernel kern(sp, lamk.lam);
        MasterEquation me = build_master_equation(g, kern, N);
        Vec rho0 = tensorize(me, random_density(rng, sp));
        Vec rt = expm(Mat(t * Mat(me.generator))) * rho0;
        if (rt.minCoeff() < -1e-10) return false;
        if (std::abs(rt.dot(me.nu_prod) - 1.0) > 1e-10) return false;
    }
    return true;
}

bool c3_log_oscillation_growth() {
    auto rng = make_rng(1003);
    std::uniform_real_distribution<double> u(0.0, 0.8);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng() % 2);
        FiniteSpace sp = random_space(rng, d);
        RateGenerator g = random_generator(rng, sp, 1.0);
        std::vector<double> g1(static_cast<std::size_t>(d) * d * d);
        for (auto& v : g1) v = u(rng);
        auto kern =
            std::make_shared<TwoThreeBodyKernel>(sp, g1, std::vector<double>(g1.size() * d, 0.0),
                                                 1.0);
        int N = 3 + static_cast<int>(rng() % 4);
        EvolutionProblem p;
        p.g = g;
        p.kern = kern;
        p.mode = EvolMode::averaged;
        p.N = N;
        p.rho0 = random_density(rng, sp, 0.1);
        p.t_end = 0.5;
        p.dt = 1e-3;
        SolutionTrace tr = solve(p);

        IntensityBounds ib = intensity_sweep(*kern, N);
        double M = g.growth_constant() + ib.M_lambda_hat + ib.M_lambda_star_hat;
        double d0 = tr.diagnostics.front().log_oscillation;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            if (tr.diagnostics[i].log_oscillation > d0 + 2.0 * M * tr.times[i] + 1e-6)
                return false;
        }
    }
    return true;
}

bool c4_linear_solver_oracle() {
    auto rng = make_rng(1004);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng() % 5);
        FiniteSpace sp = random_space(rng, d);
        RateGenerator g = random_generator(rng, sp);
        JumpKernel lam = random_jump(rng, sp);
        Density rho0 = random_density(rng, sp);
        EvolutionProblem p;
        p.g = g;
        p.mode = EvolMode::linear;
        p.frozen_kernel = lam;
        p.rho0 = rho0;
        p.t_end = 1.0;
        p.dt = 1e-3;
        p.renormalize = false;
        SolutionTrace tr = solve(p);
        Vec ref = expm(Mat(g.kstar + adjoint_gen_matrix(lam))) * rho0.w;
        if ((tr.back().w - ref).cwiseAbs().dot(sp.nu) > 1e-8) return false;
    }
    return true;
}

bool c5_comparison_and_stability() {
    auto rng = make_rng(1005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 2 + static_cast<int>(rng() % 3);
        FiniteSpace sp = random_space(rng, d);
        RateGenerator g = random_generator(rng, sp);
        JumpKernel lam = random_jump(rng, sp);
        Vec sigma0(d), rho0(d);
        for (int x = 0; x < d; ++x) {
            sigma0[x] = u(rng);
            rho0[x] = sigma0[x] + u(rng);
        }
        if (!comparison_check(g, [&lam](double) { return lam; }, rho0, sigma0, 1.0).ordered)
            return false;
    }
    for (int trial = 0; trial < 20; ++trial) {
        int d = 2 + static_cast<int>(rng() % 3);
        FiniteSpace sp = random_space(rng, d);
        RateGenerator g = random_generator(rng, sp);
        JumpKernel a = random_jump(rng, sp), b = random_jump(rng, sp);
        StabilityReport r = stability_check(
            g, [&a](double) { return a; }, [&b](double) { return b; },
            random_density(rng, sp), random_density(rng, sp), 1.0);
        if (!r.holds) return false;
    }
    return true;
}

bool c6_inequality_suite() {
    auto rng = make_rng(1006);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> up(0.01, 1.0);
    std::uniform_real_distribution<double> ue(0.1, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        int d = 2 + static_cast<int>(rng() % 7);
        FiniteSpace sp = random_space(rng, d);
        Density rho = random_density(rng, sp, 0.01), sigma = random_density(rng, sp, 0.01);
        if (!pinsker_check(rho, sigma).holds) return false;
        Vec phi(d);
        for (int x = 0; x < d; ++x) phi[x] = u(rng);
        double eta = ue(rng);
        if (!gibbs_check(phi, rho, sigma, eta).holds) return false;
        // equality witness
        Density opt = gibbs_optimizer(phi, sigma, eta);
        InequalityCheck at_opt = gibbs_check(phi, opt, sigma, eta);
        if (std::abs(at_opt.rhs - at_opt.lhs) > 1e-9) return false;
        // markov map
        Mat t_op(d, d);
        for (int c = 0; c < d; ++c) {
            Vec col(d);
            for (int r = 0; r < d; ++r) col[r] = up(rng);
            // image of the atom density at c must carry the same mass nu[c]
            col *= sp.nu[c] / col.dot(sp.nu);
            t_op.col(c) = col;
        }
        DataProcessingReport dp = data_processing_check(t_op, rho, sigma);
        if (!dp.holds || dp.jensen_worst > 1e-12) return false;
    }
    return true;
}

bool c7_integral_inequality() {
    auto rng = make_rng(1007);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng() % 2);
        FiniteSpace sp = random_space(rng, d);
        RateGenerator g = random_generator(rng, sp);
        Density rho0 = random_density(rng, sp, 0.1), sigma0 = random_density(rng, sp, 0.1);
        Mat la = Mat::Zero(d, d), lb = Mat::Zero(d, d);
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y)
                if (x != y) {
                    la(x, y) = u(rng);
                    lb(x, y) = la(x, y) + 0.1 * u(rng);
                }
        JumpKernel ka(sp, la), kb(sp, lb);
        for (double eta : {0.1, 1.0, 10.0}) {
            IntegralInequalityReport rep = integral_inequality_check(
                g, [&ka](double) { return ka; }, [&kb](double) { return kb; }, rho0, sigma0,
                eta, 1.0, 1e-3);
            if (!rep.holds || !rep.sharp_holds) return false;
        }
    }
    return true;
}

bool c8_concentration_bound() {
    FiniteSpace sp = FiniteSpace::uniform(2);
    TwoThreeBodyKernel kern = two_body_d2(sp);
    Vec w(2);
    w << 0.7, 0.3;
    Density rho(sp, w, true);

    // exact centering by enumeration for N <= 6
    for (int N = 3; N <= 6; ++N) {
        PhiFunction phi = build_phi_from_dynamics(kern, rho, N);
        Vec phibar = compensator(phi, rho);
        std::int64_t D = 1;
        for (int k = 0; k < N; ++k) D *= 2;
        Vec masses = rho.masses();
        double mean = 0.0;
        std::vector<int> config(N);
        for (std::int64_t i = 0; i < D; ++i) {
            std::int64_t rem = i;
            double p = 1.0;
            for (int k = 0; k < N; ++k) {
                config[k] = static_cast<int>(rem % 2);
                p *= masses[config[k]];
                rem /= 2;
            }
            mean += p * big_f(phi, phibar, config);
        }
        if (std::abs(mean) > 1e-12) return false;
        ConcentrationReport rep = concentration_test(phi, rho, 2000, 41);
        if (!rep.exact_available || rep.exact_value > 2.0) return false;
    }
    // Monte Carlo for larger N
    for (int N : {8, 16, 32}) {
        PhiFunction phi = build_phi_from_dynamics(kern, rho, N);
        ConcentrationReport rep = concentration_test(phi, rho, 100000, 42);
        if (!rep.pass) return false;
        if (rep.moment_estimate - 3.0 * rep.std_error > 2.0) return false;
    }
    return std::abs(universal_b() - 0.0176) < 2e-4;
}

bool c9_difference_operator_bounds() {
    FiniteSpace sp = FiniteSpace::uniform(2);
    TwoThreeBodyKernel kern = two_body_d2(sp);
    Vec w(2);
    w << 0.7, 0.3;
    Density rho(sp, w, true);
    for (int N : {3, 4, 5}) {
        PhiFunction phi = build_phi_from_dynamics(kern, rho, N);
        double C = verify_phi_conditions(phi, rho).C_hat();
        DiffOpsReport d = diff_ops(phi, rho);
        if (d.d1_max > 3.0 * C / std::sqrt(2.0) + 1e-9) return false;
        if (d.hess_hs_max > 2.5 * C * std::sqrt(1.5) + 1e-9) return false;
    }
    return true;
}

bool c10_headline_entropy_bound() {
    FiniteSpace sp = FiniteSpace::uniform(2);
    Mat q(2, 2);
    q << -1.0, 1.0, 1.5, -1.5;
    RateGenerator g(sp, q);
    TwoThreeBodyKernel kern = two_body_d2(sp);
    Vec w(2);
    w << 0.7, 0.3;
    Density rho0(sp, w, true);
    ChaosExperimentResult res =
        chaos_experiment(g, kern, rho0, {2, 3, 4, 5, 6, 7, 8}, 0.5, 1e-3);
    double prev = -1.0;
    for (const EntropyTrace& et : res.per_N) {
        if (!et.bound_ok) return false;
        const BetaConstants& c = et.constants;
        double envelope = (std::log(2.0) / et.N) *
                          (c.beta > 0 ? (std::exp(c.beta * c.T) - 1.0) / c.beta : c.T);
        for (double v : et.W)
            if (v > envelope + 1e-6) return false;
        // O(1/N) signature: N * sup W non-increasing beyond N = 4, 20% slack
        if (et.N > 4 && prev >= 0.0 && et.sup_NW > 1.2 * prev) return false;
        if (et.N >= 4) prev = et.sup_NW;
    }
    return res.all_ok;
}

bool c11_averaged_to_meanfield() {
    FiniteSpace sp = FiniteSpace::uniform(2);
    Mat q(2, 2);
    q << -0.8, 0.8, 1.1, -1.1;
    RateGenerator g(sp, q);
    auto kern = parametrized_d2(sp);
    Vec w(2);
    w << 0.65, 0.35;
    Density rho0(sp, w, true);
    std::vector<int> Ns{5, 20, 80};
    std::vector<double> bounds;
    for (int N : Ns) {
        ChaosGapReport r = averaged_vs_meanfield(*kern, g, rho0, N, 1.0);
        if (!r.holds) return false;
        bounds.push_back(r.bound);
    }
    // convergence-rate signature on the certified (eps-driven) bound
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        double x = std::log(static_cast<double>(Ns[i])), y = std::log(bounds[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = 3.0;
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return slope >= -0.8 && slope <= -0.2;
}

bool c12_simulator_exactness() {
    FiniteSpace sp = FiniteSpace::uniform(2);
    Mat q(2, 2);
    q << -1.0, 1.0, 1.5, -1.5;
    RateGenerator g(sp, q);
    TwoThreeBodyKernel kern = two_body_d2(sp);
    Vec w(2);
    w << 0.6, 0.4;
    Density rho0(sp, w, true);
    const int N = 3, replicas = 100000;
    Mat freq = simulate_marginal(g, kern, N, rho0, 1.0, replicas, 2026);
    MasterEquation me = build_master_equation(g, kern, N);
    Vec rhoN = solve_master(me, tensorize(me, rho0), 1.0);
    Density marg = master_marginal(me, rhoN, 1);
    for (int x = 0; x < 2; ++x) {
        double pexp = marg.w[x] * sp.nu[x];
        double sd = std::sqrt(std::max(pexp * (1.0 - pexp), 1e-12) / replicas);
        if (std::abs(freq(x, 0) - pexp) > 4.0 * sd) return false;
    }
    return true;
}

}  // namespace

int main() {
    criterion(1, "adjoint duality pairing identity", c1_adjoint_duality);
    criterion(2, "semigroups preserve positivity and mass", c2_semigroup_validity);
    criterion(3, "log-oscillation growth envelope", c3_log_oscillation_growth);
    criterion(4, "mild solver matches matrix exponential", c4_linear_solver_oracle);
    criterion(5, "comparison principle and stability bound", c5_comparison_and_stability);
    criterion(6, "pinsker / gibbs / data-processing suite", c6_inequality_suite);
    criterion(7, "entropy integral inequality", c7_integral_inequality);
    criterion(8, "exponential concentration bound", c8_concentration_bound);
    criterion(9, "difference-operator norm bounds", c9_difference_operator_bounds);
    criterion(10, "headline entropy envelope over N", c10_headline_entropy_bound);
    criterion(11, "averaged-to-mean-field convergence", c11_averaged_to_meanfield);
    criterion(12, "uniformized simulator marginals", c12_simulator_exactness);

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
