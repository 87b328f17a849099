#include "mflab/concentration.hpp"

#include "mflab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace mflab {

PhiFunction build_phi_from_dynamics(const MeanFieldKernel& kern, const Density& rhobar, int N) {
    if (rhobar.w.minCoeff() <= 0.0)
        throw std::invalid_argument("build_phi_from_dynamics: density must be strictly positive");
    PhiFunction phi;
    phi.space = kern.space();
    phi.N = N;
    // cache the kernel evaluation per count vector
    auto cache = std::make_shared<std::map<std::vector<int>, std::pair<Mat, Vec>>>();
    const FiniteSpace sp = kern.space();
    const MeanFieldKernel* kp = &kern;
    Vec w = rhobar.w;
    phi.eval = [cache, sp, kp, w](int x, const IVec& counts) -> double {
        std::vector<int> key(counts.data(), counts.data() + counts.size());
        auto it = cache->find(key);
        if (it == cache->end()) {
            JumpKernel lam = kp->eval_at_empirical(EmpiricalMeasure(sp, counts));
            it = cache->emplace(key, std::make_pair(adjoint_kernel(lam).lam, lam.row_sums()))
                     .first;
        }
        const Mat& adj = it->second.first;
        const Vec& rowsums = it->second.second;
        return adj.row(x).dot(w) / w[x] - rowsums[x];
    };
    return phi;
}

Vec compensator(const PhiFunction& phi, const Density& rho, std::uint64_t cap) {
    const FiniteSpace& sp = phi.space;
    Vec masses = rho.masses();
    Vec out = Vec::Zero(sp.d);
    double total = 0.0;
    enumerate_empiricals(sp, phi.N - 1, [&](const IVec& counts, double multinomial) {
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
        total += w;
        for (int x = 0; x < sp.d; ++x) out[x] += w * phi.eval(x, counts);
    }, cap);
    return out / total;
}

double big_f(const PhiFunction& phi, const Vec& phibar, const std::vector<int>& config) {
    IVec counts = IVec::Zero(phi.space.d);
    for (int x : config) counts[x] += 1;
    double f = 0.0;
    for (int k = 0; k < static_cast<int>(config.size()); ++k) {
        IVec rest = counts;
        rest[config[k]] -= 1;
        f += phi.eval(config[k], rest) - phibar[config[k]];
    }
    return f;
}

namespace {

std::int64_t pow_ll(int base, int e) {
    std::int64_t v = 1;
    for (int i = 0; i < e; ++i) v *= base;
    return v;
}

std::vector<double> tabulate_f(const PhiFunction& phi, const Vec& phibar, std::int64_t D) {
    const int d = phi.space.d;
    std::vector<double> table(D);
    std::vector<int> config(phi.N);
    for (std::int64_t i = 0; i < D; ++i) {
        std::int64_t rem = i;
        for (int k = 0; k < phi.N; ++k) {
            config[k] = static_cast<int>(rem % d);
            rem /= d;
        }
        table[i] = big_f(phi, phibar, config);
    }
    return table;
}

}  // namespace

DiffOpsReport diff_ops(const PhiFunction& phi, const Density& rho, std::int64_t cap) {
    if (cap < 0) cap = master_state_cap();
    const int d = phi.space.d;
    const int N = phi.N;
    const std::int64_t D = pow_ll(d, N);
    if (D > cap) throw std::runtime_error("diff_ops: state cap exceeded");
    Vec masses = rho.masses();
    Vec phibar = compensator(phi, rho);
    std::vector<double> F = tabulate_f(phi, phibar, D);

    std::vector<std::int64_t> pw(N);
    pw[0] = 1;
    for (int k = 1; k < N; ++k) pw[k] = pw[k - 1] * d;

    DiffOpsReport rep;
    std::vector<int> config(N);
    for (std::int64_t i = 0; i < D; ++i) {
        std::int64_t rem = i;
        for (int k = 0; k < N; ++k) {
            config[k] = static_cast<int>(rem % d);
            rem /= d;
        }
        double hs2 = 0.0;
        for (int a = 0; a < N; ++a) {
            // first-order term at coordinate a
            double s1 = 0.0;
            for (int xa = 0; xa < d; ++xa) {
                std::int64_t ia = i + (static_cast<std::int64_t>(xa) - config[a]) * pw[a];
                double diff = F[i] - F[ia];
                s1 += 0.5 * diff * diff * masses[xa];
            }
            rep.d1_max = std::max(rep.d1_max, std::sqrt(s1));
            // second-order terms (a, b), b != a
            for (int bcoord = 0; bcoord < N; ++bcoord) {
                if (bcoord == a) continue;
                double s2 = 0.0;
                for (int xa = 0; xa < d; ++xa)
                    for (int xb = 0; xb < d; ++xb) {
                        std::int64_t ia = i + (static_cast<std::int64_t>(xa) - config[a]) * pw[a];
                        std::int64_t ib =
                            i + (static_cast<std::int64_t>(xb) - config[bcoord]) * pw[bcoord];
                        std::int64_t iab =
                            ia + (static_cast<std::int64_t>(xb) - config[bcoord]) * pw[bcoord];
                        double second = F[i] - F[ia] - F[ib] + F[iab];
                        s2 += 0.25 * second * second * masses[xa] * masses[xb];
                    }
                hs2 += s2;  // (d_{ab})^2
            }
        }
        rep.hess_hs_max = std::max(rep.hess_hs_max, std::sqrt(hs2));
    }
    return rep;
}

PhiConditionReport verify_phi_conditions(const PhiFunction& phi, const Density& rho,
                                         bool exhaustive, int samples, std::uint64_t seed,
                                         std::uint64_t cap) {
    const FiniteSpace& sp = phi.space;
    const int N = phi.N;
    Vec masses = rho.masses();
    PhiConditionReport rep;

    auto bases = [&](int n, const std::function<void(const IVec&)>& visit) {
        if (n == 0) {
            visit(IVec::Zero(sp.d));
            return;
        }
        if (exhaustive) {
            enumerate_empiricals(sp, n, [&](const IVec& c, double) { visit(c); }, cap);
        } else {
            auto rng = make_rng(seed + n);
            std::uniform_int_distribution<int> atom(0, sp.d - 1);
            for (int s = 0; s < samples; ++s) {
                IVec c = IVec::Zero(sp.d);
                for (int i = 0; i < n; ++i) c[atom(rng)] += 1;
                visit(c);
            }
        }
    };

    // (Phi0) oscillation in x, (Phi1) centering against rho
    bases(N - 1, [&](const IVec& mu) {
        double lo = 0.0, hi = 0.0, center = 0.0;
        for (int x = 0; x < sp.d; ++x) {
            double v = phi.eval(x, mu);
            if (x == 0) lo = hi = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            center += v * masses[x];
        }
        rep.c0 = std::max(rep.c0, hi - lo);
        rep.c1_defect = std::max(rep.c1_defect, std::abs(center));
    });

    // (Phi2) single swap
    bases(N - 2, [&](const IVec& base) {
        for (int a = 0; a < sp.d; ++a)
            for (int a2 = 0; a2 < sp.d; ++a2) {
                if (a2 == a) continue;
                IVec mu = base, mu1 = base;
                mu[a] += 1;
                mu1[a2] += 1;
                for (int z = 0; z < sp.d; ++z)
                    rep.c2 = std::max(rep.c2,
                                      (N - 1) * std::abs(phi.eval(z, mu) - phi.eval(z, mu1)));
            }
    });

    // (Phi3) double swap
    if (N >= 3) {
        bases(N - 3, [&](const IVec& base) {
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
                            for (int z = 0; z < sp.d; ++z) {
                                double v = phi.eval(z, m) - phi.eval(z, m1) - phi.eval(z, m2) +
                                           phi.eval(z, m12);
                                rep.c3 = std::max(
                                    rep.c3, static_cast<double>(N - 1) * (N - 2) * std::abs(v));
                            }
                        }
        });
    }
    return rep;
}

ConcentrationReport concentration_test(const PhiFunction& phi, const Density& rho, int samples,
                                       std::uint64_t seed, std::optional<double> C_declared,
                                       std::int64_t cap) {
    if (samples < 1000) throw std::invalid_argument("concentration_test: samples must be >= 1000");
    if (cap < 0) cap = master_state_cap();
    ConcentrationReport rep;
    rep.b = universal_b();
    rep.samples = samples;
    rep.seed = seed;
    rep.C = C_declared ? *C_declared
                       : (phi.constant_C ? *phi.constant_C
                                         : verify_phi_conditions(phi, rho, true).C_hat());
    if (rep.C <= 0.0) {
        // degenerate Phi: F vanishes identically
        rep.exact_available = true;
        rep.exact_value = 1.0;
        rep.moment_estimate = 1.0;
        rep.median_of_means = 1.0;
        rep.pass = true;
        return rep;
    }
    const double scale = rep.b / rep.C;
    const int d = phi.space.d;
    const int N = phi.N;
    Vec masses = rho.masses();
    Vec phibar = compensator(phi, rho);

    const std::int64_t D = pow_ll(d, N);
    if (D <= cap) {
        std::vector<double> F = tabulate_f(phi, phibar, D);
        double e = 0.0;
        for (std::int64_t i = 0; i < D; ++i) {
            std::int64_t rem = i;
            double p = 1.0;
            for (int k = 0; k < N; ++k) {
                p *= masses[static_cast<int>(rem % d)];
                rem /= d;
            }
            e += p * std::exp(scale * std::abs(F[i]));
        }
        rep.exact_available = true;
        rep.exact_value = e;
    }

    auto rng = make_rng(seed);
    std::vector<int> config(N);
    std::vector<double> vals(samples);
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
        for (int k = 0; k < N; ++k) config[k] = sample_index(masses, 1.0, rng);
        double v = std::exp(scale * std::abs(big_f(phi, phibar, config)));
        vals[s] = v;
        sum += v;
        sumsq += v * v;
    }
    rep.moment_estimate = sum / samples;
    double var = std::max(0.0, sumsq / samples - rep.moment_estimate * rep.moment_estimate);
    rep.std_error = std::sqrt(var / samples);
    // 16-bucket median of means
    const int buckets = 16;
    std::vector<double> means(buckets, 0.0);
    for (int s = 0; s < samples; ++s) means[s % buckets] += vals[s];
    for (int bkt = 0; bkt < buckets; ++bkt)
        means[bkt] /= static_cast<double>(samples / buckets + (bkt < samples % buckets ? 1 : 0));
    std::sort(means.begin(), means.end());
    rep.median_of_means = 0.5 * (means[buckets / 2 - 1] + means[buckets / 2]);

    bool mc_pass = rep.moment_estimate - 3.0 * rep.std_error <= 2.0 &&
                   rep.median_of_means - 3.0 * rep.std_error <= 2.0;
    rep.pass = rep.exact_available ? rep.exact_value <= 2.0 && mc_pass : mc_pass;
    return rep;
}

}  // namespace mflab
