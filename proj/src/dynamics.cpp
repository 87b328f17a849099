#include "mflab/dynamics.hpp"

#include "mflab/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

namespace mflab {

namespace {

double l1_norm(const Vec& w, const Vec& nu) { return (w.cwiseAbs().array() * nu.array()).sum(); }

double log_osc(const Vec& w) {
    if (w.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log(w.maxCoeff()) - std::log(w.minCoeff());
}

Vec rk4_step(const std::function<Vec(double, const Vec&)>& rhs, double t, const Vec& y,
             double h) {
    Vec k1 = rhs(t, y);
    Vec k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    Vec k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    Vec k4 = rhs(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct DriveEval {
    const EvolutionProblem* p;

    JumpKernel kernel_at(double t, const Vec& w) const {
        switch (p->mode) {
            case EvolMode::meanfield: {
                Density rho(p->g.space, w.cwiseMax(0.0));
                return p->kern->eval(rho.masses());
            }
            case EvolMode::averaged: {
                Density rho(p->g.space, w.cwiseMax(0.0));
                if (auto* ttb = dynamic_cast<const TwoThreeBodyKernel*>(p->kern.get()))
                    return ttb->eval(rho.masses());  // averaged form is N-free
                return averaged_kernel(*p->kern, rho, p->N);
            }
            case EvolMode::prescribed:
                return p->kern->eval(p->sigma_curve(t).masses());
            case EvolMode::linear:
                if (p->kernel_curve) return p->kernel_curve(t);
                return *p->frozen_kernel;
        }
        throw std::logic_error("unreachable");
    }

    Vec operator()(double t, const Vec& w) const {
        JumpKernel k = kernel_at(t, w);
        return p->g.kstar * w + adjoint_gen_apply(k, w);
    }
};

SolutionTrace run_grid(const EvolutionProblem& problem, double dt, bool record) {
    DriveEval rhs{&problem};
    const Vec& nu = problem.g.space.nu;
    const int steps = std::max(1, static_cast<int>(std::llround(problem.t_end / dt)));
    const double h = problem.t_end / steps;
    Vec w = problem.rho0.w;
    SolutionTrace trace;
    auto push = [&](double t, const Vec& v, double mass_defect, double minv) {
        if (!record) return;
        trace.times.push_back(t);
        trace.densities.emplace_back(problem.g.space, v);
        trace.diagnostics.push_back({mass_defect, minv, log_osc(v)});
    };
    push(0.0, w, std::abs(l1_norm(w, nu) - 1.0), w.minCoeff());
    for (int s = 0; s < steps; ++s) {
        double t = s * h;
        w = rk4_step(rhs, t, w, h);
        double minv = w.minCoeff();
        if (minv < -1e-10)
            throw std::runtime_error("solve: density became negative beyond roundoff ("
                                     + std::to_string(minv) + ")");
        w = w.cwiseMax(0.0);
        double mass = w.dot(nu);
        double mass_defect = std::abs(mass - 1.0);
        if (problem.renormalize) {
            if (mass_defect > 1e-8)
                throw std::runtime_error("solve: mass defect exceeded tolerance");
            w /= mass;
        }
        push((s + 1) * h, w, mass_defect, minv);
    }
    if (!record) {
        trace.times.push_back(problem.t_end);
        trace.densities.emplace_back(problem.g.space, w);
        trace.diagnostics.push_back({0.0, w.minCoeff(), log_osc(w)});
    }
    return trace;
}

}  // namespace

SolutionTrace solve(const EvolutionProblem& problem) {
    if (problem.dt <= 0.0 || problem.t_end < 0.0)
        throw std::invalid_argument("solve: dt must be positive and t_end nonnegative");
    if (problem.mode == EvolMode::prescribed && !problem.sigma_curve)
        throw std::invalid_argument("solve: prescribed mode requires sigma_curve");
    if (problem.mode == EvolMode::linear && !problem.kernel_curve && !problem.frozen_kernel)
        throw std::invalid_argument("solve: linear mode requires a kernel");
    if (problem.mode == EvolMode::averaged && problem.N < 2)
        throw std::invalid_argument("solve: averaged mode requires N >= 2");
    if (problem.t_end == 0.0) {
        SolutionTrace t;
        t.times = {0.0};
        t.densities = {problem.rho0};
        t.diagnostics = {{0.0, problem.rho0.w.minCoeff(), log_osc(problem.rho0.w)}};
        return t;
    }
    SolutionTrace trace = run_grid(problem, problem.dt, true);
    if (problem.certify_halving) {
        SolutionTrace half = run_grid(problem, problem.dt / 2.0, false);
        double gap = l1_norm(trace.densities.back().w - half.densities.back().w,
                             problem.g.space.nu);
        if (gap > 1e-8) {
            char msg[96];
            std::snprintf(msg, sizeof(msg), "solve: step-halving check failed, defect %.3e",
                          gap);
            throw std::runtime_error(msg);
        }
    }
    return trace;
}

Vec integrate_linear(const std::function<Vec(double, const Vec&)>& rhs, Vec rho0, double t_end,
                     double dt) {
    const int steps = std::max(1, static_cast<int>(std::llround(t_end / dt)));
    const double h = t_end / steps;
    Vec w = std::move(rho0);
    for (int s = 0; s < steps; ++s) w = rk4_step(rhs, s * h, w, h);
    return w;
}

std::vector<int> MasterEquation::decode(std::int64_t idx) const {
    std::vector<int> config(N);
    for (int k = 0; k < N; ++k) {
        config[k] = static_cast<int>(idx % space.d);
        idx /= space.d;
    }
    return config;
}

std::int64_t MasterEquation::encode(const std::vector<int>& config) const {
    std::int64_t idx = 0;
    for (int k = N - 1; k >= 0; --k) idx = idx * space.d + config[k];
    return idx;
}

std::int64_t master_state_cap() {
    if (const char* env = std::getenv("MFLAB_CAP_STATES")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end != env && v > 0) return v;
    }
    return 20000;
}

MasterEquation build_master_equation(const RateGenerator& g, const MeanFieldKernel& kern, int N,
                                     std::int64_t cap) {
    if (N < 2) throw std::invalid_argument("build_master_equation: N must be >= 2");
    if (cap < 0) cap = master_state_cap();
    const int d = g.space.d;
    std::int64_t D = 1;
    for (int k = 0; k < N; ++k) {
        D *= d;
        if (D > cap)
            throw std::runtime_error("build_master_equation: state cap exceeded (d^N > "
                                     + std::to_string(cap) + ")");
    }
    MasterEquation me;
    me.space = g.space;
    me.N = N;
    me.D = D;
    me.nu_prod.resize(D);

    // cache (rowsums, adjoint rows) per rest-particle count vector
    struct KernelData {
        Vec rowsums;
        Mat adj;
    };
    std::map<std::vector<int>, KernelData> cache;
    auto kernel_for = [&](const IVec& counts) -> const KernelData& {
        std::vector<int> key(counts.data(), counts.data() + counts.size());
        auto it = cache.find(key);
        if (it == cache.end()) {
            JumpKernel lam = kern.eval_at_empirical(EmpiricalMeasure(g.space, counts));
            KernelData data{lam.row_sums(), adjoint_kernel(lam).lam};
            it = cache.emplace(std::move(key), std::move(data)).first;
        }
        return it->second;
    };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(D) * N * d);
    std::vector<int> config(N);
    std::vector<std::int64_t> pow(N);
    pow[0] = 1;
    for (int k = 1; k < N; ++k) pow[k] = pow[k - 1] * d;

    for (std::int64_t i = 0; i < D; ++i) {
        std::int64_t rem = i;
        IVec counts = IVec::Zero(d);
        double nup = 1.0;
        for (int k = 0; k < N; ++k) {
            config[k] = static_cast<int>(rem % d);
            rem /= d;
            counts[config[k]] += 1;
            nup *= g.space.nu[config[k]];
        }
        me.nu_prod[i] = nup;
        double diag = 0.0;
        for (int k = 0; k < N; ++k) {
            const int xk = config[k];
            IVec rest = counts;
            rest[xk] -= 1;
            const KernelData& kd = kernel_for(rest);
            diag += -kd.rowsums[xk] + g.kstar(xk, xk);
            for (int y = 0; y < d; ++y) {
                if (y == xk) continue;
                std::int64_t j = i + (static_cast<std::int64_t>(y) - xk) * pow[k];
                // (L rho)(x) picks up rho at the config with coordinate k set to y
                trip.emplace_back(i, j, kd.adj(xk, y) + g.kstar(xk, y));
            }
        }
        trip.emplace_back(i, i, diag);
    }
    me.generator.resize(D, D);
    me.generator.setFromTriplets(trip.begin(), trip.end());
    return me;
}

Vec solve_master(const MasterEquation& me, const Vec& rho0, double t, double dt) {
    if (rho0.size() != me.D) throw std::invalid_argument("solve_master: dimension mismatch");
    if (t == 0.0) return rho0;
    if (me.D <= 2000) {
        Mat dense = Mat(me.generator);
        return expm(Mat(t * dense)) * rho0;
    }
    auto rhs = [&](double, const Vec& w) -> Vec { return me.generator * w; };
    Vec full = integrate_linear(rhs, rho0, t, dt);
    Vec half = integrate_linear(rhs, rho0, t, dt / 2.0);
    double gap = ((full - half).cwiseAbs().array() * me.nu_prod.array()).sum();
    if (gap > 1e-8)
        throw std::runtime_error("solve_master: step-halving check failed");
    return half;
}

Vec tensorize(const MasterEquation& me, const Density& rho) {
    Vec out(me.D);
    for (std::int64_t i = 0; i < me.D; ++i) {
        std::int64_t rem = i;
        double v = 1.0;
        for (int k = 0; k < me.N; ++k) {
            v *= rho.w[static_cast<int>(rem % me.space.d)];
            rem /= me.space.d;
        }
        out[i] = v;
    }
    return out;
}

Density master_marginal(const MasterEquation& me, const Vec& rhoN, int site) {
    if (site < 1 || site > me.N) throw std::invalid_argument("master_marginal: site out of range");
    const int d = me.space.d;
    Vec w = Vec::Zero(d);
    for (std::int64_t i = 0; i < me.D; ++i) {
        std::int64_t rem = i;
        int xs = -1;
        double nu_rest = 1.0;
        for (int k = 0; k < me.N; ++k) {
            int digit = static_cast<int>(rem % d);
            rem /= d;
            if (k == site - 1)
                xs = digit;
            else
                nu_rest *= me.space.nu[digit];
        }
        w[xs] += rhoN[i] * nu_rest;
    }
    return Density(me.space, w.cwiseMax(0.0));
}

namespace {

struct SimContext {
    const RateGenerator* g;
    const MeanFieldKernel* kern;
    int N;
    double qmax;
    double m_lambda;
};

std::vector<int> run_one(const SimContext& c, const Density& rho0, double t_end,
                         std::uint64_t seed, ParticleTrajectory* traj) {
    const FiniteSpace& sp = c.g->space;
    auto rng = make_rng(seed);
    Vec masses0 = rho0.masses();
    std::vector<int> config(c.N);
    IVec counts = IVec::Zero(sp.d);
    for (int k = 0; k < c.N; ++k) {
        config[k] = sample_index(masses0, 1.0, rng);
        counts[config[k]] += 1;
    }
    if (traj) {
        traj->event_times.push_back(0.0);
        traj->configs.push_back(config);
    }
    const double majorant_per_particle = c.qmax + c.m_lambda;
    const double majorant = c.N * majorant_per_particle;
    if (majorant <= 0.0) return config;
    std::exponential_distribution<double> exp_dist(majorant);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, c.N - 1);
    double t = exp_dist(rng);
    while (t <= t_end) {
        int k = pick(rng);
        const int xk = config[k];
        IVec rest = counts;
        rest[xk] -= 1;
        JumpKernel lam = c.kern->eval_at_empirical(EmpiricalMeasure(sp, rest));
        // combined jump rates for particle k: generator moves plus mean-field jumps
        Vec rates(sp.d);
        double total = 0.0;
        for (int y = 0; y < sp.d; ++y) {
            double r = (y == xk) ? 0.0 : c.g->q(xk, y) + lam.lam(xk, y);
            rates[y] = r;
            total += r;
        }
        if (total > majorant_per_particle * (1.0 + 1e-12))
            throw std::runtime_error("simulate_particles: majorant rate exceeded");
        if (unif(rng) < total / majorant_per_particle) {
            int y = sample_index(rates, total, rng);
            config[k] = y;
            counts[xk] -= 1;
            counts[y] += 1;
            if (traj) {
                traj->event_times.push_back(t);
                traj->configs.push_back(config);
            }
        }
        t += exp_dist(rng);
    }
    return config;
}

SimContext make_context(const RateGenerator& g, const MeanFieldKernel& kern, int N) {
    SimContext c{&g, &kern, N, 0.0, 0.0};
    c.qmax = g.q.diagonal().cwiseAbs().maxCoeff();
    if (kern.constants.M_lambda)
        c.m_lambda = *kern.constants.M_lambda;
    else
        c.m_lambda = intensity_sweep(kern, N, 500, 17).M_lambda_hat * 1.05;
    return c;
}

}  // namespace

ParticleTrajectory simulate_particles(const RateGenerator& g, const MeanFieldKernel& kern, int N,
                                      const Density& rho0, double t_end, std::uint64_t seed) {
    if (N < 2) throw std::invalid_argument("simulate_particles: N must be >= 2");
    SimContext c = make_context(g, kern, N);
    ParticleTrajectory traj;
    traj.seed = seed;
    run_one(c, rho0, t_end, derive_seed(seed, 0), &traj);
    return traj;
}

Mat simulate_marginal(const RateGenerator& g, const MeanFieldKernel& kern, int N,
                      const Density& rho0, double t_end, int replicas, std::uint64_t seed) {
    SimContext c = make_context(g, kern, N);
    Mat freq = Mat::Zero(g.space.d, N);
    for (int r = 0; r < replicas; ++r) {
        std::vector<int> config = run_one(c, rho0, t_end, derive_seed(seed, r), nullptr);
        for (int k = 0; k < N; ++k) freq(config[k], k) += 1.0;
    }
    return freq / static_cast<double>(replicas);
}

ComparisonReport comparison_check(const RateGenerator& g,
                                  const std::function<JumpKernel(double)>& kernel_curve,
                                  const Vec& rho0, const Vec& sigma0, double t_end, double dt) {
    auto rhs = [&](double t, const Vec& w) -> Vec {
        return g.kstar * w + adjoint_gen_apply(kernel_curve(t), w);
    };
    const int steps = std::max(1, static_cast<int>(std::llround(t_end / dt)));
    const double h = t_end / steps;
    Vec r = rho0, s = sigma0;
    ComparisonReport rep;
    for (int i = 0; i <= steps; ++i) {
        double gap = (r - s).minCoeff();
        rep.worst_gap = std::min(rep.worst_gap, gap);
        if (gap < -1e-9) rep.ordered = false;
        if (i < steps) {
            double t = i * h;
            r = rk4_step(rhs, t, r, h);
            s = rk4_step(rhs, t, s, h);
        }
    }
    return rep;
}

StabilityReport stability_check(const RateGenerator& g,
                                const std::function<JumpKernel(double)>& curve_a,
                                const std::function<JumpKernel(double)>& curve_b,
                                const Density& rho0, const Density& sigma0, double t_end,
                                double dt) {
    const FiniteSpace& sp = g.space;
    auto rhs_a = [&](double t, const Vec& w) -> Vec {
        return g.kstar * w + adjoint_gen_apply(curve_a(t), w);
    };
    auto rhs_b = [&](double t, const Vec& w) -> Vec {
        return g.kstar * w + adjoint_gen_apply(curve_b(t), w);
    };
    const int steps = std::max(1, static_cast<int>(std::llround(t_end / dt)));
    const double h = t_end / steps;
    StabilityReport rep;
    for (int i = 0; i <= steps; ++i) {
        double t = i * h;
        Mat ma = adjoint_gen_matrix(curve_a(t));
        Mat mb = adjoint_gen_matrix(curve_b(t));
        rep.M_T = std::max(rep.M_T, op_norm_l1(ma, sp));
        rep.C_T = std::max(rep.C_T, op_norm_l1(Mat(ma - mb), sp));
    }
    Vec r = rho0.w, s = sigma0.w;
    const double init_gap = l1_norm(r - s, sp.nu);
    for (int i = 0; i <= steps; ++i) {
        double t = i * h;
        double lhs = l1_norm(r - s, sp.nu);
        double growth = rep.M_T > 0.0 ? (std::exp(t * rep.M_T) - 1.0) / rep.M_T : t;
        double rhs_val = init_gap + rep.C_T * growth;
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs_val);
        double viol = lhs - rhs_val;
        rep.max_violation = std::max(rep.max_violation, viol);
        if (viol > 1e-8) rep.holds = false;
        if (i < steps) {
            r = rk4_step(rhs_a, t, r, h);
            s = rk4_step(rhs_b, t, s, h);
        }
    }
    return rep;
}

ChaosGapReport averaged_vs_meanfield(const MeanFieldKernel& kern, const RateGenerator& g,
                                     const Density& rho0, int N, double t, double dt,
                                     int eps_samples, std::uint64_t seed) {
    EvolutionProblem mf;
    mf.g = g;
    mf.kern = std::shared_ptr<const MeanFieldKernel>(&kern, [](const MeanFieldKernel*) {});
    mf.mode = EvolMode::meanfield;
    mf.rho0 = rho0;
    mf.t_end = t;
    mf.dt = dt;
    SolutionTrace rho = solve(mf);

    EvolutionProblem av = mf;
    av.mode = EvolMode::averaged;
    av.N = N;
    SolutionTrace rbar = solve(av);

    ChaosGapReport rep;
    rep.l1_gap = l1_norm(rho.densities.back().w - rbar.densities.back().w, g.space.nu);

    double m_lambda = kern.constants.M_lambda
                          ? *kern.constants.M_lambda
                          : intensity_sweep(kern, N).M_lambda_hat;
    double lip;
    if (kern.constants.lipschitz_L1) {
        lip = *kern.constants.lipschitz_L1;
    } else {
        // estimate the TV-Lipschitz constant of mu -> Lambda(mu) by a sweep
        auto rng = make_rng(seed);
        std::exponential_distribution<double> e(1.0);
        lip = 0.0;
        for (int s = 0; s < 200; ++s) {
            Vec a(g.space.d), b(g.space.d);
            for (int x = 0; x < g.space.d; ++x) {
                a[x] = e(rng);
                b[x] = e(rng);
            }
            a /= a.sum();
            b /= b.sum();
            double tv = (a - b).cwiseAbs().sum();
            if (tv < 1e-12) continue;
            lip = std::max(lip, kernel_distance(kern.eval(a), kern.eval(b)) / tv);
        }
    }
    const double K = 2.0 * (m_lambda + lip);

    // sup_s eps_N over a coarse grid of the averaged trace
    double eps_sup = 0.0, se_max = 0.0;
    const int grid = 5;
    for (int i = 0; i <= grid; ++i) {
        std::size_t idx = (rbar.densities.size() - 1) * i / grid;
        MonteCarloEstimate est =
            epsilon_N(kern, rbar.densities[idx], N, eps_samples, derive_seed(seed, 100 + i));
        if (est.estimate > eps_sup) {
            eps_sup = est.estimate;
            se_max = est.std_error;
        }
    }
    rep.eps_sup = eps_sup;
    double growth = K > 0.0 ? (std::exp(K * t) - 1.0) / K : t;
    rep.bound = 2.0 * t * growth * eps_sup;
    rep.holds = rep.l1_gap <= rep.bound + 2.0 * t * growth * 3.0 * se_max + 1e-9;
    return rep;
}

}  // namespace mflab
