#include "mflab/entropy.hpp"

#include <cmath>
#include <limits>

namespace mflab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double l1_norm(const Vec& w, const Vec& nu) { return (w.cwiseAbs().array() * nu.array()).sum(); }
}  // namespace

FiniteSpace product_space(const FiniteSpace& base, int k) {
    std::int64_t D = 1;
    for (int i = 0; i < k; ++i) D *= base.d;
    Vec nu(D);
    for (std::int64_t idx = 0; idx < D; ++idx) {
        std::int64_t rem = idx;
        double v = 1.0;
        for (int i = 0; i < k; ++i) {
            v *= base.nu[static_cast<int>(rem % base.d)];
            rem /= base.d;
        }
        nu[idx] = v;
    }
    return FiniteSpace(static_cast<int>(D), nu);
}

Density tensor_density(const Density& rho, int k) {
    const FiniteSpace& base = rho.space;
    FiniteSpace prod = product_space(base, k);
    Vec w(prod.d);
    for (int idx = 0; idx < prod.d; ++idx) {
        int rem = idx;
        double v = 1.0;
        for (int i = 0; i < k; ++i) {
            v *= rho.w[rem % base.d];
            rem /= base.d;
        }
        w[idx] = v;
    }
    return Density(prod, w);
}

double relative_entropy(const Density& rho, const Density& sigma) {
    if (!(rho.space == sigma.space))
        throw std::invalid_argument("relative_entropy: space mismatch");
    double h = 0.0;
    for (int x = 0; x < rho.space.d; ++x) {
        if (rho.w[x] <= 0.0) continue;  // 0 log 0 = 0
        if (sigma.w[x] <= 0.0) return kInf;
        h += rho.w[x] * std::log(rho.w[x] / sigma.w[x]) * rho.space.nu[x];
    }
    return h;
}

double renormalized_entropy(const Density& rhoN, const Density& sigmaN, int N) {
    return relative_entropy(rhoN, sigmaN) / N;
}

Density marginal(const Density& rhoN, const FiniteSpace& base, int N, int k) {
    if (k < 1 || k > N) throw std::invalid_argument("marginal: k out of range");
    std::int64_t Dk = 1;
    for (int i = 0; i < k; ++i) Dk *= base.d;
    std::int64_t Drest = 1;
    for (int i = k; i < N; ++i) Drest *= base.d;
    FiniteSpace prod_k = product_space(base, k);
    Vec w = Vec::Zero(static_cast<int>(Dk));
    for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(rhoN.w.size()); ++idx) {
        std::int64_t head = idx % Dk;
        std::int64_t rem = idx / Dk;
        double nu_rest = 1.0;
        for (int i = k; i < N; ++i) {
            nu_rest *= base.nu[static_cast<int>(rem % base.d)];
            rem /= base.d;
        }
        w[static_cast<int>(head)] += rhoN.w[idx] * nu_rest;
    }
    return Density(prod_k, w);
}

InequalityCheck pinsker_check(const Density& rho, const Density& sigma) {
    InequalityCheck c;
    c.lhs = l1_norm(rho.w - sigma.w, rho.space.nu);
    double h = relative_entropy(rho, sigma);
    c.rhs = std::isinf(h) ? kInf : std::sqrt(2.0 * h);
    c.holds = c.lhs <= c.rhs + 1e-12;
    return c;
}

InequalityCheck gibbs_check(const Vec& phi, const Density& rho, const Density& sigma,
                            double eta) {
    if (eta <= 0.0) throw std::invalid_argument("gibbs_check: eta must be positive");
    InequalityCheck c;
    c.lhs = (phi.array() * rho.w.array() * rho.space.nu.array()).sum();
    double mgf = ((phi / eta).array().exp() * sigma.w.array() * sigma.space.nu.array()).sum();
    double h = relative_entropy(rho, sigma);
    c.rhs = std::isinf(h) ? kInf : eta * (h + std::log(mgf));
    c.holds = c.lhs <= c.rhs + 1e-9 * (1.0 + std::abs(c.rhs));
    return c;
}

Density gibbs_optimizer(const Vec& phi, const Density& sigma, double eta) {
    Vec w = sigma.w.array() * (phi / eta).array().exp();
    w /= (w.array() * sigma.space.nu.array()).sum();
    return Density(sigma.space, w);
}

DataProcessingReport data_processing_check(const Mat& t_op, const Density& rho,
                                           const Density& sigma) {
    const FiniteSpace& sp = rho.space;
    const int d = sp.d;
    // validate: positivity preservation and mass conservation on basis densities
    for (int x = 0; x < d; ++x) {
        Vec e = Vec::Zero(d);
        e[x] = 1.0 / sp.nu[x];
        Vec img = t_op * e;
        if (img.minCoeff() < -1e-12)
            throw std::invalid_argument("data_processing_check: operator not positive");
        if (std::abs((img.array() * sp.nu.array()).sum() - 1.0) > 1e-9)
            throw std::invalid_argument("data_processing_check: operator not mass-conserving");
    }
    DataProcessingReport rep;
    Density trho(sp, (t_op * rho.w).cwiseMax(0.0));
    Density tsigma(sp, (t_op * sigma.w).cwiseMax(0.0));
    rep.before = relative_entropy(rho, sigma);
    rep.after = relative_entropy(trho, tsigma);
    rep.holds = rep.after <= rep.before + 1e-9 * (1.0 + std::abs(rep.before));

    // Jensen sub-check for the induced Markov operator: T~ eta = T*(sigma eta) / T*sigma,
    // with Phi(u) = u log u and eta = rho/sigma.
    bool ok = true;
    Vec eta(d);
    for (int x = 0; x < d; ++x) eta[x] = sigma.w[x] > 0.0 ? rho.w[x] / sigma.w[x] : 0.0;
    Vec tse = t_op * (sigma.w.cwiseProduct(eta));
    Vec ts = t_op * sigma.w;
    auto phi_fn = [](double u) { return u > 0.0 ? u * std::log(u) : 0.0; };
    Vec phi_eta(d);
    for (int x = 0; x < d; ++x) phi_eta[x] = phi_fn(eta[x]);
    Vec t_phi = t_op * (sigma.w.cwiseProduct(phi_eta));
    for (int x = 0; x < d; ++x) {
        if (ts[x] <= 0.0) continue;
        double lhs = phi_fn(tse[x] / ts[x]);
        double rhs = t_phi[x] / ts[x];
        double defect = lhs - rhs;
        rep.jensen_worst = std::max(rep.jensen_worst, defect);
        if (defect > 1e-9 * (1.0 + std::abs(rhs))) ok = false;
    }
    rep.holds = rep.holds && ok;
    return rep;
}

IntegralInequalityReport integral_inequality_check(
    const RateGenerator& g, const std::function<JumpKernel(double)>& curve_a,
    const std::function<JumpKernel(double)>& curve_b, const Density& rho0, const Density& sigma0,
    double eta, double t_end, double dt) {
    if (sigma0.w.minCoeff() <= 0.0)
        throw std::invalid_argument("integral_inequality_check: log sigma0 must be bounded");
    EvolutionProblem pa;
    pa.g = g;
    pa.mode = EvolMode::linear;
    pa.kernel_curve = curve_a;
    pa.rho0 = rho0;
    pa.t_end = t_end;
    pa.dt = dt;
    pa.certify_halving = false;
    EvolutionProblem pb = pa;
    pb.kernel_curve = curve_b;
    pb.rho0 = sigma0;
    SolutionTrace ra = solve(pa);
    SolutionTrace rb = solve(pb);

    const std::size_t n = ra.times.size();
    std::vector<double> H(n), integrand_soft(n), integrand_sharp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Density& rho = ra.densities[i];
        const Density& sigma = rb.densities[i];
        if (sigma.w.minCoeff() <= 1e-13)
            throw std::runtime_error("integral_inequality_check: sigma hit the clamp floor");
        H[i] = relative_entropy(rho, sigma);
        double t = ra.times[i];
        Vec diff = adjoint_gen_apply(curve_a(t), sigma.w) - adjoint_gen_apply(curve_b(t), sigma.w);
        Vec phi = diff.cwiseQuotient(sigma.w);
        double mgf =
            ((phi / eta).array().exp() * sigma.w.array() * g.space.nu.array()).sum();
        integrand_soft[i] = H[i] + std::log(mgf);
        integrand_sharp[i] = (phi.array() * rho.w.array() * g.space.nu.array()).sum();
    }
    IntegralInequalityReport rep;
    rep.budget = 10.0 * dt * dt * std::max(t_end, 1.0);
    double acc_soft = 0.0, acc_sharp = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double h = ra.times[i] - ra.times[i - 1];
        acc_soft += 0.5 * h * (integrand_soft[i] + integrand_soft[i - 1]);
        acc_sharp += 0.5 * h * (integrand_sharp[i] + integrand_sharp[i - 1]);
        double v_soft = H[i] - (H[0] + eta * acc_soft);
        double v_sharp = H[i] - (H[0] + acc_sharp);
        rep.max_violation = std::max(rep.max_violation, std::max(v_soft, v_sharp));
        if (v_soft > rep.budget) rep.holds = false;
        if (v_sharp > rep.budget) rep.sharp_holds = false;
    }
    return rep;
}

double universal_b() {
    return (1.0 / 11.0) / (3.0 / std::sqrt(2.0) + 2.5 * std::sqrt(1.5));
}

BetaConstants assemble_beta(double M_K, double M_lambda, double M_lambda_star, double theta,
                            double delta0, double T, bool phi0_symmetric_variant) {
    BetaConstants c;
    c.M_K = M_K;
    c.M_lambda = M_lambda;
    c.M_lambda_star = M_lambda_star;
    c.theta = theta;
    c.delta0 = delta0;
    c.T = T;
    c.phi0_symmetric_variant = phi0_symmetric_variant;
    c.M = M_K + M_lambda + M_lambda_star;
    c.B_T = std::exp(delta0 + 2.0 * c.M * T);
    double first = phi0_symmetric_variant ? 2.0 * (c.B_T * M_lambda + M_lambda_star)
                                          : 2.0 * c.B_T * M_lambda + M_lambda_star;
    c.C_T = std::max(first, theta * (c.B_T + 1.0));
    c.b = universal_b();
    c.beta = c.C_T > 0.0 ? c.b / c.C_T : 0.0;
    return c;
}

ChaosExperimentResult chaos_experiment(const RateGenerator& g, const MeanFieldKernel& kern,
                                       const Density& rho0bar, const std::vector<int>& N_list,
                                       double T, double dt, const Vec* rho0N,
                                       bool phi0_symmetric_variant) {
    if (rho0bar.w.minCoeff() <= 0.0)
        throw std::invalid_argument("chaos_experiment: initial log-oscillation must be finite");
    ChaosExperimentResult result;
    for (int N : N_list) {
        EntropyTrace et;
        et.N = N;

        // averaged mean-field flow
        EvolutionProblem av;
        av.g = g;
        av.kern = std::shared_ptr<const MeanFieldKernel>(&kern, [](const MeanFieldKernel*) {});
        av.mode = EvolMode::averaged;
        av.N = N;
        av.rho0 = rho0bar;
        av.t_end = T;
        av.dt = dt;
        av.certify_halving = false;
        SolutionTrace rbar = solve(av);

        // constants from the verifiers at this N
        IntensityBounds ib = intensity_sweep(kern, N);
        double M_lambda = kern.constants.M_lambda ? std::min(*kern.constants.M_lambda, 0.0 + ib.M_lambda_hat)
                                                  : ib.M_lambda_hat;
        double M_lambda_star = kern.constants.M_lambda_star
                                   ? std::min(*kern.constants.M_lambda_star, ib.M_lambda_star_hat)
                                   : ib.M_lambda_star_hat;
        double theta_hat = verify_A3(kern, std::max(N, 3)).theta_hat;
        if (N >= 3) theta_hat = std::max(theta_hat, verify_A4(kern, N).theta_hat);
        if (kern.constants.theta) theta_hat = std::min(theta_hat, *kern.constants.theta);
        double delta0 = std::log(rho0bar.w.maxCoeff()) - std::log(rho0bar.w.minCoeff());
        et.constants = assemble_beta(g.growth_constant(), M_lambda, M_lambda_star, theta_hat,
                                     delta0, T, phi0_symmetric_variant);

        // exact N-particle law
        MasterEquation me = build_master_equation(g, kern, N);
        Vec rhoN = rho0N ? *rho0N : tensorize(me, rho0bar);
        FiniteSpace prod = product_space(g.space, N);

        const int grid = 20;
        Mat step;
        {
            Mat dense = Mat(me.generator);
            step = expm(Mat((T / grid) * dense));
        }
        double W0 = renormalized_entropy(Density(prod, rhoN.cwiseMax(0.0)),
                                         tensor_density(rbar.densities.front(), N), N);
        const double beta = et.constants.beta;
        Vec cur = rhoN;
        for (int i = 0; i <= grid; ++i) {
            double t = T * i / grid;
            std::size_t idx = (rbar.densities.size() - 1) * i / grid;
            Density rbarN = tensor_density(rbar.densities[idx], N);
            double W = renormalized_entropy(Density(prod, cur.cwiseMax(0.0)), rbarN, N);
            W = std::max(W, 0.0);  // clamp quadrature noise on exact-zero entropies
            double bound = beta > 0.0
                               ? W0 * std::exp(beta * t) +
                                     (std::log(2.0) / N) * (std::exp(beta * t) - 1.0) / beta
                               : W0 + (std::log(2.0) / N) * t;
            et.times.push_back(t);
            et.W.push_back(W);
            et.bound.push_back(bound);
            et.sup_W = std::max(et.sup_W, W);
            double viol = W - bound;
            if (viol > 1e-6) et.bound_ok = false;
            if (viol > 1e-9) et.within_tolerance = false;
            if (i < grid) cur = step * cur;
        }
        et.sup_NW = N * et.sup_W;
        result.all_ok = result.all_ok && et.bound_ok;
        result.per_N.push_back(std::move(et));
    }
    return result;
}

}  // namespace mflab
