#include <doctest.h>

#include "mflab/meanfield.hpp"
#include "mflab/rng.hpp"

#include <cmath>
#include <random>

using namespace mflab;

namespace {

std::vector<double> random_tensor(std::mt19937_64& rng, std::size_t n, double hi) {
    std::uniform_real_distribution<double> u(0.0, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

Density random_density(std::mt19937_64& rng, const FiniteSpace& sp) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Vec w(sp.d);
    for (int x = 0; x < sp.d; ++x) w[x] = u(rng);
    w /= w.dot(sp.nu);
    return Density(sp, w, true);
}

}  // namespace

TEST_CASE("constant kernel ignores the measure") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    Mat lam(2, 2);
    lam << 0.0, 1.0, 0.5, 0.0;
    ConstantKernel k(sp, lam);
    Vec m1(2), m2(2);
    m1 << 1.0, 0.0;
    m2 << 0.3, 0.7;
    CHECK((k.eval(m1).lam - k.eval(m2).lam).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two/three-body: all particles at one atom reduces to the diagonal pair term") {
    auto rng = make_rng(201);
    const int d = 3;
    FiniteSpace sp = FiniteSpace::uniform(d);
    auto g1 = random_tensor(rng, d * d * d, 1.0);
    auto g2 = random_tensor(rng, d * d * d * d, 1.0);
    TwoThreeBodyKernel kern(sp, g1, g2, 1.0);

    const int N = 5, z = 1;
    IVec counts = IVec::Zero(d);
    counts[z] = N - 1;
    JumpKernel out = kern.eval_at_empirical(EmpiricalMeasure(sp, counts));
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) {
            if (x == y) continue;
            // ordered index pairs k != l all carry the state pair (z, z)
            double expect = kern.g1(x, z, y) + kern.g2(x, z, z, y);
            CHECK(out.lam(x, y) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("two/three-body enumeration average equals the closed form, d=3 N=5") {
    auto rng = make_rng(202);
    const int d = 3;
    FiniteSpace sp = FiniteSpace::uniform(d);
    auto g1 = random_tensor(rng, d * d * d, 1.0);
    auto g2 = random_tensor(rng, d * d * d * d, 1.0);
    auto kern = std::make_shared<TwoThreeBodyKernel>(sp, g1, g2, 1.0);
    Density rho = random_density(rng, sp);

    JumpKernel avg = averaged_kernel(*kern, rho, 5, /*allow_monte_carlo=*/false);
    JumpKernel closed = kern->eval(rho.masses());
    CHECK((avg.lam - closed.lam).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("averaging commutes with affine kernels") {
    auto rng = make_rng(203);
    const int d = 2;
    FiniteSpace sp = FiniteSpace::uniform(d);
    Mat base(2, 2);
    base << 0.0, 0.4, 0.2, 0.0;
    Mat s0(2, 2), s1(2, 2);
    s0 << 0.0, 0.3, 0.1, 0.0;
    s1 << 0.0, 0.1, 0.6, 0.0;
    AffineKernel kern(sp, base, {s0, s1});
    Density rho = random_density(rng, sp);
    for (int N : {2, 4, 7}) {
        JumpKernel avg = averaged_kernel(kern, rho, N, false);
        JumpKernel direct = kern.eval(rho.masses());
        CHECK((avg.lam - direct.lam).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("monte carlo averaging agrees with enumeration") {
    auto rng = make_rng(204);
    const int d = 2;
    FiniteSpace sp = FiniteSpace::uniform(d);
    auto g1 = random_tensor(rng, d * d * d, 1.0);
    std::vector<double> g2(d * d * d * d, 0.0);
    TwoThreeBodyKernel kern(sp, g1, g2, 1.0);
    Density rho = random_density(rng, sp);
    JumpKernel exact = averaged_kernel(kern, rho, 6, false);
    // force the sampling path with a tiny threshold
    JumpKernel mc = averaged_kernel(kern, rho, 6, true, 200000, 42, /*mc_threshold=*/1);
    CHECK((exact.lam - mc.lam).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("affine kernels have vanishing second differences") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    // measure enters only through an empirical average, so double swaps cancel
    auto g1v = std::vector<double>(8, 0.0);
    auto set1 = [&](int x, int z, int y, double v) { g1v[(x * 2 + z) * 2 + y] = v; };
    set1(0, 0, 1, 0.3);
    set1(0, 1, 1, 0.1);
    set1(1, 0, 0, 0.1);
    set1(1, 1, 0, 0.6);
    TwoThreeBodyKernel kern(sp, g1v, std::vector<double>(16, 0.0), 1.0);
    SweepResult r = verify_A4(kern, 6);
    CHECK(r.theta_hat <= 1e-12);
}

TEST_CASE("bounded-difference sweeps on the parametrized family") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    // lam(x, y; mu) = lam(kappa*mu) P(x,y) with a smooth bounded intensity
    std::vector<double> kappa{1.0, -0.5, -0.3, 0.8};
    auto gamma = [](int x, const Vec& theta, int y) {
        Mat P(2, 2);
        P << 0.0, 1.0, 1.0, 0.0;
        return 2.0 / (1.0 + std::exp(-(0.2 + 1.5 * theta[0]))) * P(x, y);
    };
    ParametrizedKernel kern(sp, 1, kappa, gamma, 2.0, 0.75, 1.125);
    for (int N : {4, 6}) {
        SweepResult a3 = verify_A3(kern, N);
        SweepResult a4 = verify_A4(kern, N);
        CHECK(a3.theta_hat > 0.0);
        // TV-Lipschitz scale: nu(Pi) * m1 * m2 controls the first difference
        CHECK(a3.theta_hat <= sp.nu_total() * 2.0 * 0.75 * 4.0);
        CHECK(a4.theta_hat <= 8.0 * sp.nu_total() * 2.0 * (0.75 + 1.125) * 4.0);
    }
    // sampled mode stays below the exhaustive sup
    SweepResult ex = verify_A3(kern, 5);
    SweepResult sm = verify_A3(kern, 5, false, 300, 9);
    CHECK(sm.theta_hat <= ex.theta_hat + 1e-12);
}

TEST_CASE("declared theta is validated against the sweep") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    std::vector<double> g1v(8, 0.0);
    g1v[(0 * 2 + 0) * 2 + 1] = 1.0;  // strong companion dependence
    TwoThreeBodyKernel kern(sp, g1v, std::vector<double>(16, 0.0), 1.0);
    kern.constants.theta = 1e-6;  // deliberately too small
    CHECK_THROWS_AS(verify_A3(kern, 4), std::runtime_error);
}

TEST_CASE("intensity sweep respects the uniform bound of the family") {
    auto rng = make_rng(205);
    const int d = 2;
    FiniteSpace sp = FiniteSpace::uniform(d);
    auto g1 = random_tensor(rng, d * d * d, 1.0);
    TwoThreeBodyKernel kern(sp, g1, std::vector<double>(16, 0.0), 1.0);
    IntensityBounds b = intensity_sweep(kern, 6);
    // each row sum is a convex combination of the per-companion rows
    double m_max = 0.0;
    for (int x = 0; x < d; ++x)
        for (int z = 0; z < d; ++z) {
            double row = 0.0;
            for (int y = 0; y < d; ++y)
                if (y != x) row += kern.g1(x, z, y);
            m_max = std::max(m_max, row);
        }
    CHECK(b.M_lambda_hat <= m_max + 1e-12);
    CHECK(b.M_lambda_star_hat > 0.0);
}

TEST_CASE("epsilon_N decays like one over sqrt N") {
    FiniteSpace sp = FiniteSpace::uniform(2);
    std::vector<double> kappa{1.0, -0.5, -0.3, 0.8};
    auto gamma = [](int x, const Vec& theta, int y) {
        Mat P(2, 2);
        P << 0.0, 1.0, 1.0, 0.0;
        return 2.0 / (1.0 + std::exp(-(0.2 + 1.5 * theta[0]))) * P(x, y);
    };
    ParametrizedKernel kern(sp, 1, kappa, gamma, 2.0, 0.75, 1.125);
    auto rng = make_rng(206);
    Density rho = random_density(rng, sp);

    std::vector<int> Ns{8, 32, 128, 512};
    std::vector<double> eps;
    for (int N : Ns) {
        MonteCarloEstimate e = epsilon_N(kern, rho, N, 40000, 77);
        eps.push_back(e.estimate);
        // universal envelope: m1 * nu(Pi) / sqrt(N-1)
        CHECK(e.estimate <= 2.0 * sp.nu_total() / std::sqrt(N - 1.0) + 3.0 * e.std_error);
    }
    // log-log regression slope near -1/2
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        double x = std::log(static_cast<double>(Ns[i])), y = std::log(eps[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(Ns.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.25));
}
