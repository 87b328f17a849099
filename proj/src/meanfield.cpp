#include "mflab/meanfield.hpp"

#include "mflab/rng.hpp"

#include <cmath>

namespace mflab {

double MeanFieldKernel::xi(int x, const EmpiricalMeasure& mu, const Density& rho) const {
    JumpKernel at_mu = eval_at_empirical(mu);
    JumpKernel at_rho = eval(rho.masses());
    return (at_mu.lam.row(x) - at_rho.lam.row(x)).cwiseAbs().sum();
}

ConstantKernel::ConstantKernel(FiniteSpace space, Mat lam)
    : MeanFieldKernel(space), kernel_(space_, std::move(lam)) {}

AffineKernel::AffineKernel(FiniteSpace space, Mat base, std::vector<Mat> slope)
    : MeanFieldKernel(std::move(space)), base_(std::move(base)), slope_(std::move(slope)) {
    if (static_cast<int>(slope_.size()) != space_.d)
        throw std::invalid_argument("AffineKernel: one slope matrix per atom required");
}

JumpKernel AffineKernel::eval(const Vec& masses) const {
    Mat lam = base_;
    for (int z = 0; z < space_.d; ++z) lam += masses[z] * slope_[z];
    return JumpKernel(space_, lam.cwiseMax(0.0));
}

TwoThreeBodyKernel::TwoThreeBodyKernel(FiniteSpace space, std::vector<double> gamma1,
                                       std::vector<double> gamma2, double c1)
    : MeanFieldKernel(std::move(space)),
      gamma1_(std::move(gamma1)),
      gamma2_(std::move(gamma2)),
      c1_(c1),
      d_(space_.d) {
    if (static_cast<int>(gamma1_.size()) != d_ * d_ * d_)
        throw std::invalid_argument("TwoThreeBodyKernel: gamma1 must have d^3 entries");
    if (static_cast<int>(gamma2_.size()) != d_ * d_ * d_ * d_)
        throw std::invalid_argument("TwoThreeBodyKernel: gamma2 must have d^4 entries");
    for (double v : gamma1_)
        if (v < 0.0) throw std::invalid_argument("TwoThreeBodyKernel: negative gamma1 entry");
    for (double v : gamma2_)
        if (v < 0.0) throw std::invalid_argument("TwoThreeBodyKernel: negative gamma2 entry");
    // the interaction kernels are jump kernels in (x, target): zero x==y mass
    for (int x = 0; x < d_; ++x)
        for (int z = 0; z < d_; ++z) {
            gamma1_[(x * d_ + z) * d_ + x] = 0.0;
            for (int zp = 0; zp < d_; ++zp) gamma2_[((x * d_ + z) * d_ + zp) * d_ + x] = 0.0;
        }
    for (double v : gamma2_)
        if (v > 0.0) {
            has_three_ = true;
            break;
        }
}

JumpKernel TwoThreeBodyKernel::eval(const Vec& masses) const {
    // N-free averaged closed form: int G1 dmu + int int G2 dmu dmu
    Mat lam = Mat::Zero(d_, d_);
    for (int x = 0; x < d_; ++x)
        for (int y = 0; y < d_; ++y) {
            if (y == x) continue;
            double v = 0.0;
            for (int z = 0; z < d_; ++z) {
                v += masses[z] * g1(x, z, y);
                for (int zp = 0; zp < d_; ++zp) v += masses[z] * masses[zp] * g2(x, z, zp, y);
            }
            lam(x, y) = v;
        }
    return JumpKernel(space_, lam);
}

JumpKernel TwoThreeBodyKernel::eval_at_empirical(const EmpiricalMeasure& mu) const {
    return eval_two_three_body(*this, mu);
}

JumpKernel eval_two_three_body(const TwoThreeBodyKernel& kern, const EmpiricalMeasure& mu) {
    const int d = kern.space().d;
    const int n = mu.n;  // N - 1 interaction partners
    if (n < 2 && kern.has_three_body())
        throw std::invalid_argument("eval_two_three_body: need at least two partners (N >= 3)");
    Mat lam = Mat::Zero(d, d);
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) {
            if (y == x) continue;
            double two = 0.0, three = 0.0;
            for (int z = 0; z < d; ++z) {
                const double cz = mu.counts[z];
                if (cz == 0.0) continue;
                two += cz * kern.g1(x, z, y);
                for (int zp = 0; zp < d; ++zp) {
                    // ordered index pairs (k, l), k != l
                    double pairs = (z == zp) ? cz * (cz - 1.0) : cz * mu.counts[zp];
                    if (pairs > 0.0) three += pairs * kern.g2(x, z, zp, y);
                }
            }
            lam(x, y) = two / n;
            if (n >= 2) lam(x, y) += three / (static_cast<double>(n) * (n - 1));
        }
    return JumpKernel(kern.space(), lam);
}

ParametrizedKernel::ParametrizedKernel(FiniteSpace space, int k, std::vector<double> kappa,
                                       GammaFn gamma, double m1, double m2, double m3)
    : MeanFieldKernel(std::move(space)),
      k_(k),
      kappa_(std::move(kappa)),
      gamma_(std::move(gamma)),
      m1_(m1),
      m2_(m2),
      m3_(m3) {
    if (static_cast<int>(kappa_.size()) != space_.d * space_.d * k_)
        throw std::invalid_argument("ParametrizedKernel: kappa must have d*d*k entries");
}

Vec ParametrizedKernel::kappa_conv(int x, const Vec& masses) const {
    Vec theta = Vec::Zero(k_);
    for (int y = 0; y < space_.d; ++y)
        for (int c = 0; c < k_; ++c) theta[c] += kappa_[(x * space_.d + y) * k_ + c] * masses[y];
    return theta;
}

JumpKernel ParametrizedKernel::eval(const Vec& masses) const {
    return eval_parametrized(*this, masses);
}

JumpKernel eval_parametrized(const ParametrizedKernel& kern, const Vec& masses) {
    const FiniteSpace& sp = kern.space();
    Mat lam = Mat::Zero(sp.d, sp.d);
    for (int x = 0; x < sp.d; ++x) {
        Vec theta = kern.kappa_conv(x, masses);
        for (int y = 0; y < sp.d; ++y) {
            if (y == x) continue;
            lam(x, y) = kern.gamma()(x, theta, y) * sp.nu[y];
        }
    }
    return JumpKernel(sp, lam);
}

double ParametrizedKernel::xi(int x, const EmpiricalMeasure& mu, const Density& rho) const {
    Vec tm = kappa_conv(x, mu.masses());
    Vec tr = kappa_conv(x, rho.masses());
    return space_.nu_total() * (tm - tr).cwiseAbs().maxCoeff();
}

JumpKernel averaged_kernel(const MeanFieldKernel& kern, const Density& rho, int N,
                           bool allow_monte_carlo, int mc_samples, std::uint64_t seed,
                           std::uint64_t mc_threshold) {
    if (N < 2) throw std::invalid_argument("averaged_kernel: N must be >= 2");
    const FiniteSpace& sp = kern.space();
    const int n = N - 1;
    Vec masses = rho.masses();
    const std::uint64_t combos = composition_count(n, sp.d);
    Mat acc = Mat::Zero(sp.d, sp.d);
    if (combos <= mc_threshold) {
        double total_w = 0.0;
        enumerate_empiricals(sp, n, [&](const IVec& counts, double multinomial) {
            double logp = 0.0;
            bool zero = false;
            for (int x = 0; x < sp.d; ++x) {
                if (counts[x] == 0) continue;
                if (masses[x] <= 0.0) {
                    zero = true;
                    break;
                }
                logp += counts[x] * std::log(masses[x]);
            }
            if (zero) return;
            double w = multinomial * std::exp(logp);
            acc += w * kern.eval_at_empirical(EmpiricalMeasure(sp, counts)).lam;
            total_w += w;
        });
        acc /= total_w;  // weights sum to 1 up to roundoff
    } else {
        if (!allow_monte_carlo)
            throw std::runtime_error("averaged_kernel: composition cap exceeded; enable Monte Carlo");
        auto rng = make_rng(seed);
        for (int s = 0; s < mc_samples; ++s) {
            IVec counts = IVec::Zero(sp.d);
            for (int i = 0; i < n; ++i) counts[sample_index(masses, 1.0, rng)] += 1;
            acc += kern.eval_at_empirical(EmpiricalMeasure(sp, counts)).lam;
        }
        acc /= static_cast<double>(mc_samples);
    }
    return JumpKernel(sp, acc);
}

namespace {

double pair_diff_norm(const MeanFieldKernel& kern, const EmpiricalMeasure& a,
                      const EmpiricalMeasure& b) {
    JumpKernel ka = kern.eval_at_empirical(a);
    JumpKernel kb = kern.eval_at_empirical(b);
    double v = kernel_distance(ka, kb);
    return std::max(v, kernel_distance(adjoint_kernel(ka), adjoint_kernel(kb)));
}

// visit all base counts with `n` particles (n == 0 visits the zero vector once)
void for_each_base(const FiniteSpace& sp, int n, std::uint64_t cap, bool exhaustive,
                   int samples, std::uint64_t seed,
                   const std::function<void(const IVec&)>& visit) {
    if (n == 0) {
        visit(IVec::Zero(sp.d));
        return;
    }
    if (exhaustive) {
        if (composition_count(n, sp.d) > cap)
            throw std::runtime_error("bounded-difference sweep: composition cap exceeded");
        enumerate_empiricals(sp, n, [&](const IVec& c, double) { visit(c); }, cap);
    } else {
        auto rng = make_rng(seed);
        std::uniform_int_distribution<int> atom(0, sp.d - 1);
        for (int s = 0; s < samples; ++s) {
            IVec c = IVec::Zero(sp.d);
            for (int i = 0; i < n; ++i) c[atom(rng)] += 1;
            visit(c);
        }
    }
}

}  // namespace

SweepResult verify_A3(const MeanFieldKernel& kern, int N, bool exhaustive, int samples,
                      std::uint64_t seed, std::uint64_t cap) {
    if (N < 3) throw std::invalid_argument("verify_A3: N must be >= 3");
    const FiniteSpace& sp = kern.space();
    SweepResult res;
    for_each_base(sp, N - 2, cap, exhaustive, samples, seed, [&](const IVec& base) {
        for (int a = 0; a < sp.d; ++a)
            for (int a2 = 0; a2 < sp.d; ++a2) {
                if (a2 == a) continue;
                IVec ca = base, cb = base;
                ca[a] += 1;
                cb[a2] += 1;
                double v = (N - 1) * pair_diff_norm(kern, EmpiricalMeasure(sp, ca),
                                                    EmpiricalMeasure(sp, cb));
                if (v > res.theta_hat) {
                    res.theta_hat = v;
                    res.witness_counts = base;
                    res.witness_a = a;
                    res.witness_a2 = a2;
                }
            }
    });
    if (kern.constants.theta && res.theta_hat > *kern.constants.theta + 1e-9)
        throw std::runtime_error("verify_A3: declared theta exceeded");
    return res;
}

SweepResult verify_A4(const MeanFieldKernel& kern, int N, bool exhaustive, int samples,
                      std::uint64_t seed, std::uint64_t cap) {
    if (N < 3) throw std::invalid_argument("verify_A4: N must be >= 3");
    const FiniteSpace& sp = kern.space();
    SweepResult res;
    for_each_base(sp, N - 3, cap, exhaustive, samples, seed, [&](const IVec& base) {
        for (int a = 0; a < sp.d; ++a)
            for (int a2 = 0; a2 < sp.d; ++a2)
                for (int b = 0; b < sp.d; ++b)
                    for (int b2 = 0; b2 < sp.d; ++b2) {
                        if (a == a2 && b == b2) continue;
                        IVec m = base, m1 = base, m2 = base, m12 = base;
                        m[a] += 1;
                        m[b] += 1;
                        m1[a2] += 1;
                        m1[b] += 1;
                        m2[a] += 1;
                        m2[b2] += 1;
                        m12[a2] += 1;
                        m12[b2] += 1;
                        JumpKernel kmu = kern.eval_at_empirical(EmpiricalMeasure(sp, m));
                        JumpKernel k1 = kern.eval_at_empirical(EmpiricalMeasure(sp, m1));
                        JumpKernel k2 = kern.eval_at_empirical(EmpiricalMeasure(sp, m2));
                        JumpKernel k12 = kern.eval_at_empirical(EmpiricalMeasure(sp, m12));
                        Mat second = kmu.lam - k1.lam - k2.lam + k12.lam;
                        Mat second_adj = adjoint_kernel(kmu).lam - adjoint_kernel(k1).lam -
                                         adjoint_kernel(k2).lam + adjoint_kernel(k12).lam;
                        double v = std::max(second.cwiseAbs().rowwise().sum().maxCoeff(),
                                            second_adj.cwiseAbs().rowwise().sum().maxCoeff());
                        v *= static_cast<double>(N - 1) * (N - 2);
                        if (v > res.theta_hat) {
                            res.theta_hat = v;
                            res.witness_counts = base;
                            res.witness_a = a;
                            res.witness_a2 = a2;
                            res.witness_b = b;
                            res.witness_b2 = b2;
                        }
                    }
    });
    if (kern.constants.theta && res.theta_hat > *kern.constants.theta + 1e-9)
        throw std::runtime_error("verify_A4: declared theta exceeded");
    return res;
}

MonteCarloEstimate epsilon_N(const MeanFieldKernel& kern, const Density& rho, int N,
                             int samples, std::uint64_t seed) {
    if (samples < 100) throw std::invalid_argument("epsilon_N: samples must be >= 100");
    if (N < 2) throw std::invalid_argument("epsilon_N: N must be >= 2");
    const FiniteSpace& sp = kern.space();
    Vec masses = rho.masses();
    auto rng = make_rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
        int x1 = sample_index(masses, 1.0, rng);
        IVec counts = IVec::Zero(sp.d);
        for (int i = 0; i < N - 1; ++i) counts[sample_index(masses, 1.0, rng)] += 1;
        double v = kern.xi(x1, EmpiricalMeasure(sp, counts), rho);
        sum += v;
        sumsq += v * v;
    }
    MonteCarloEstimate est;
    est.samples = samples;
    est.estimate = sum / samples;
    double var = std::max(0.0, sumsq / samples - est.estimate * est.estimate);
    est.std_error = std::sqrt(var / samples);
    return est;
}

IntensityBounds intensity_sweep(const MeanFieldKernel& kern, int N, int samples,
                                std::uint64_t seed) {
    const FiniteSpace& sp = kern.space();
    auto rng = make_rng(seed);
    std::exponential_distribution<double> e(1.0);
    std::uniform_int_distribution<int> atom(0, sp.d - 1);
    IntensityBounds out;
    auto record = [&](const JumpKernel& k) {
        out.M_lambda_hat = std::max(out.M_lambda_hat, k.j_norm());
        out.M_lambda_star_hat = std::max(out.M_lambda_star_hat, adjoint_kernel(k).j_norm());
    };
    for (int s = 0; s < samples; ++s) {
        if (s % 2 == 0 || N < 3) {
            Vec m(sp.d);
            for (int x = 0; x < sp.d; ++x) m[x] = e(rng);
            m /= m.sum();
            record(kern.eval(m));
        } else {
            IVec counts = IVec::Zero(sp.d);
            for (int i = 0; i < N - 1; ++i) counts[atom(rng)] += 1;
            record(kern.eval_at_empirical(EmpiricalMeasure(sp, counts)));
        }
    }
    return out;
}

}  // namespace mflab
