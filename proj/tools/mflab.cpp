// mflab: experiment front door for the mean-field jump process laboratory.
//
// Usage: mflab <experiment> --config <path> [--seed S] [--out DIR]
// Exit codes: 0 all assertions passed, 1 assertion failure, 2 config error.

#include "mflab/config.hpp"
#include "mflab/rng.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace mflab;

namespace {

struct RunContext {
    Json config;
    fs::path out_dir;
    std::uint64_t seed = 0;
    Json manifest;
    bool all_pass = true;

    void record(const std::string& name, bool pass) {
        manifest["assertions"][name] = pass;
        if (!pass) all_pass = false;
    }
    void artifact(const fs::path& p) { manifest["artifacts"].push_back(p.string()); }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(RunContext& ctx, const std::string& name,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    fs::path p = ctx.out_dir / name;
    std::ofstream os(p);
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
        os << "\n";
    }
    ctx.artifact(p);
}

void write_json(RunContext& ctx, const std::string& name, const Json& j) {
    require_finite(j, name);
    fs::path p = ctx.out_dir / name;
    std::ofstream os(p);
    os << j.dump(2) << "\n";
    ctx.artifact(p);
}

void trace_csv(RunContext& ctx, const std::string& name, const SolutionTrace& trace) {
    std::vector<std::string> header{"t"};
    const int d = trace.densities.front().space.d;
    for (int x = 0; x < d; ++x) header.push_back("rho" + std::to_string(x));
    header.insert(header.end(), {"mass_defect", "min_value", "log_oscillation"});
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::vector<double> row{trace.times[i]};
        for (int x = 0; x < d; ++x) row.push_back(trace.densities[i].w[x]);
        row.push_back(trace.diagnostics[i].mass_defect);
        row.push_back(trace.diagnostics[i].min_value);
        row.push_back(trace.diagnostics[i].log_oscillation);
        rows.push_back(std::move(row));
    }
    write_csv(ctx, name, header, rows);
}

EvolutionProblem make_problem(const RunContext& ctx, const FiniteSpace& sp) {
    EvolutionProblem p;
    p.g = parse_generator(ctx.config.at("generator"), sp);
    p.kern = parse_kernel(ctx.config.at("kernel"), sp);
    p.rho0 = parse_density(ctx.config.at("rho0"), sp);
    p.t_end = ctx.config.value("t_end", 1.0);
    p.dt = ctx.config.value("dt", 1e-3);
    return p;
}

int run_solve(RunContext& ctx, EvolMode mode) {
    FiniteSpace sp = parse_space(ctx.config.at("space"));
    EvolutionProblem p = make_problem(ctx, sp);
    p.mode = mode;
    if (mode == EvolMode::averaged) p.N = ctx.config.at("N").get<int>();
    SolutionTrace trace = solve(p);
    trace_csv(ctx, mode == EvolMode::averaged ? "trace_averaged.csv" : "trace_mf.csv", trace);
    double final_mass = trace.back().mass();
    ctx.record("mass_conserved", std::abs(final_mass - 1.0) <= 1e-8);
    ctx.record("nonnegative", trace.back().w.minCoeff() >= 0.0);
    return 0;
}

int run_master(RunContext& ctx) {
    FiniteSpace sp = parse_space(ctx.config.at("space"));
    RateGenerator g = parse_generator(ctx.config.at("generator"), sp);
    auto kern = parse_kernel(ctx.config.at("kernel"), sp);
    int N = ctx.config.at("N").get<int>();
    double t_end = ctx.config.value("t_end", 1.0);
    MasterEquation me;
    try {
        me = build_master_equation(g, *kern, N);
    } catch (const std::runtime_error& e) {
        if (std::string(e.what()).find("state cap") != std::string::npos) {
            ctx.manifest["status"] = "skipped: cap";
            write_json(ctx, "report.json", {{"status", "skipped: cap"}});
            return 0;
        }
        throw;
    }
    Density rho0 = parse_density(ctx.config.at("rho0"), sp);
    Vec rhoN = solve_master(me, tensorize(me, rho0), t_end, ctx.config.value("dt", 1e-3));
    std::vector<std::vector<double>> rows;
    for (std::int64_t i = 0; i < me.D; ++i)
        rows.push_back({static_cast<double>(i), rhoN[i]});
    write_csv(ctx, "master.csv", {"state_index", "density"}, rows);
    double mass = rhoN.dot(me.nu_prod);
    ctx.record("mass_conserved", std::abs(mass - 1.0) <= 1e-8);
    ctx.record("nonnegative", rhoN.minCoeff() >= -1e-10);
    return 0;
}

int run_simulate(RunContext& ctx) {
    FiniteSpace sp = parse_space(ctx.config.at("space"));
    RateGenerator g = parse_generator(ctx.config.at("generator"), sp);
    auto kern = parse_kernel(ctx.config.at("kernel"), sp);
    int N = ctx.config.at("N").get<int>();
    double t_end = ctx.config.value("t_end", 1.0);
    int replicas = ctx.config.value("replicas", 100000);
    Density rho0 = parse_density(ctx.config.at("rho0"), sp);
    Mat freq = simulate_marginal(g, *kern, N, rho0, t_end, replicas, ctx.seed);
    Json rep;
    rep["replicas"] = replicas;
    rep["seed"] = ctx.seed;
    for (int x = 0; x < sp.d; ++x) rep["site1_frequency"].push_back(freq(x, 0));
    // compare against the exact master-equation marginal when it fits the cap
    std::int64_t D = 1;
    bool fits = true;
    for (int k = 0; k < N && fits; ++k) {
        D *= sp.d;
        fits = D <= master_state_cap();
    }
    if (fits) {
        MasterEquation me = build_master_equation(g, *kern, N);
        Vec rhoN = solve_master(me, tensorize(me, rho0), t_end);
        Density marg = master_marginal(me, rhoN, 1);
        bool ok = true;
        double worst = 0.0;
        for (int x = 0; x < sp.d; ++x) {
            double pexp = marg.w[x] * sp.nu[x];
            double sd = std::sqrt(std::max(pexp * (1.0 - pexp), 1e-12) / replicas);
            double z = std::abs(freq(x, 0) - pexp) / sd;
            worst = std::max(worst, z);
            if (z > 4.0) ok = false;
            rep["master_marginal"].push_back(pexp);
        }
        rep["max_z"] = worst;
        ctx.record("marginal_within_4_sigma", ok);
    }
    write_json(ctx, "report.json", rep);
    return 0;
}

int run_chaos(RunContext& ctx) {
    FiniteSpace sp = parse_space(ctx.config.at("space"));
    RateGenerator g = parse_generator(ctx.config.at("generator"), sp);
    auto kern = parse_kernel(ctx.config.at("kernel"), sp);
    Density rho0 = parse_density(ctx.config.at("rho0"), sp);
    std::vector<int> N_list = ctx.config.at("N_list").get<std::vector<int>>();
    double T = ctx.config.value("t_end", 0.5);
    double dt = ctx.config.value("dt", 1e-3);
    // skip N values beyond the master-equation cap
    std::vector<int> usable;
    Json skipped = Json::array();
    for (int N : N_list) {
        std::int64_t D = 1;
        bool fits = true;
        for (int k = 0; k < N && fits; ++k) {
            D *= sp.d;
            fits = D <= master_state_cap();
        }
        if (fits)
            usable.push_back(N);
        else
            skipped.push_back(N);
    }
    ChaosExperimentResult res = chaos_experiment(
        g, *kern, rho0, usable, T, dt, nullptr,
        ctx.config.value("phi0_symmetric_variant", false));
    Json summary;
    if (!skipped.empty()) summary["skipped: cap"] = skipped;
    for (const EntropyTrace& et : res.per_N) {
        Json per;
        per["sup_W"] = et.sup_W;
        per["sup_NW"] = et.sup_NW;
        per["bound_ok"] = et.bound_ok;
        per["within_tolerance"] = et.within_tolerance;
        summary["per_N"][std::to_string(et.N)] = per;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < et.times.size(); ++i)
            rows.push_back({et.times[i], et.W[i], et.bound[i]});
        write_csv(ctx, "entropy_N" + std::to_string(et.N) + ".csv", {"t", "W", "bound"}, rows);
        ctx.record("bound_ok_N" + std::to_string(et.N), et.bound_ok);
    }
    if (!res.per_N.empty()) {
        const BetaConstants& c = res.per_N.back().constants;
        summary["beta_constants"] = {{"M_K", c.M_K},
                                     {"M_lambda", c.M_lambda},
                                     {"M_lambda_star", c.M_lambda_star},
                                     {"theta", c.theta},
                                     {"delta0", c.delta0},
                                     {"T", c.T},
                                     {"B_T", c.B_T},
                                     {"C_T", c.C_T},
                                     {"b", c.b},
                                     {"beta", c.beta}};
    }
    write_json(ctx, "summary.json", summary);
    return 0;
}

int run_concentration(RunContext& ctx) {
    FiniteSpace sp = parse_space(ctx.config.at("space"));
    auto kern = parse_kernel(ctx.config.at("kernel"), sp);
    Density rho = parse_density(ctx.config.at("rho0"), sp);
    int N = ctx.config.at("N").get<int>();
    int samples = ctx.config.value("samples", 100000);
    PhiFunction phi = build_phi_from_dynamics(*kern, rho, N);
    ConcentrationReport rep = concentration_test(phi, rho, samples, ctx.seed);
    Json j;
    j["C"] = rep.C;
    j["b"] = rep.b;
    j["exact_available"] = rep.exact_available;
    if (rep.exact_available) j["exact_value"] = rep.exact_value;
    j["moment_estimate"] = rep.moment_estimate;
    j["std_error"] = rep.std_error;
    j["median_of_means"] = rep.median_of_means;
    j["samples"] = rep.samples;
    j["seed"] = rep.seed;
    j["pass"] = rep.pass;
    write_json(ctx, "report.json", j);
    ctx.record("exponential_moment", rep.pass);
    return 0;
}

int run_verify(RunContext& ctx) {
    FiniteSpace sp = parse_space(ctx.config.at("space"));
    auto kern = parse_kernel(ctx.config.at("kernel"), sp);
    int N = ctx.config.at("N").get<int>();
    Json j;
    IntensityBounds ib = intensity_sweep(*kern, N);
    j["M_lambda_hat"] = ib.M_lambda_hat;
    j["M_lambda_star_hat"] = ib.M_lambda_star_hat;
    bool exhaustive = ctx.config.value("mode", std::string("exhaustive")) == "exhaustive";
    j["A3_theta_hat"] = verify_A3(*kern, N, exhaustive).theta_hat;
    if (N >= 3) j["A4_theta_hat"] = verify_A4(*kern, N, exhaustive).theta_hat;
    if (ctx.config.contains("rho0")) {
        Density rho = parse_density(ctx.config.at("rho0"), sp);
        PhiFunction phi = build_phi_from_dynamics(*kern, rho, N);
        PhiConditionReport pc = verify_phi_conditions(phi, rho, exhaustive);
        j["phi"] = {{"c0", pc.c0}, {"c1_defect", pc.c1_defect}, {"c2", pc.c2},
                    {"c3", pc.c3}, {"C_hat", pc.C_hat()}};
        ctx.record("phi_centered", pc.c1_defect <= 1e-10);
    }
    bool ok = true;
    if (kern->constants.M_lambda) ok = ok && ib.M_lambda_hat <= *kern->constants.M_lambda + 1e-9;
    if (kern->constants.M_lambda_star)
        ok = ok && ib.M_lambda_star_hat <= *kern->constants.M_lambda_star + 1e-9;
    ctx.record("declared_constants_respected", ok);
    write_json(ctx, "report.json", j);
    return 0;
}

int run_inequalities(RunContext& ctx) {
    FiniteSpace sp = parse_space(ctx.config.at("space"));
    auto rng = make_rng(ctx.seed);
    std::exponential_distribution<double> e(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto rand_density = [&]() {
        Vec w(sp.d);
        for (int x = 0; x < sp.d; ++x) w[x] = e(rng) + 1e-3;
        w /= w.dot(sp.nu);
        return Density(sp, w);
    };
    int trials = ctx.config.value("trials", 1000);
    int viol_pinsker = 0, viol_gibbs = 0, viol_dpi = 0;
    for (int t = 0; t < trials; ++t) {
        Density rho = rand_density(), sigma = rand_density();
        if (!pinsker_check(rho, sigma).holds) ++viol_pinsker;
        Vec phi(sp.d);
        for (int x = 0; x < sp.d; ++x) phi[x] = 2.0 * u(rng) - 1.0;
        if (!gibbs_check(phi, rho, sigma, 0.1 + u(rng)).holds) ++viol_gibbs;
        Mat t_op(sp.d, sp.d);
        for (int c = 0; c < sp.d; ++c) {
            Vec col(sp.d);
            for (int r = 0; r < sp.d; ++r) col[r] = e(rng);
            col *= sp.nu[c] / col.dot(sp.nu);  // conserve the atom mass nu[c]
            t_op.col(c) = col;
        }
        if (!data_processing_check(t_op, rho, sigma).holds) ++viol_dpi;
    }
    Json j;
    j["trials"] = trials;
    j["pinsker_violations"] = viol_pinsker;
    j["gibbs_violations"] = viol_gibbs;
    j["data_processing_violations"] = viol_dpi;
    ctx.record("pinsker", viol_pinsker == 0);
    ctx.record("gibbs", viol_gibbs == 0);
    ctx.record("data_processing", viol_dpi == 0);
    if (ctx.config.contains("generator")) {
        RateGenerator g = parse_generator(ctx.config.at("generator"), sp);
        Density rho0 = rand_density(), sigma0 = rand_density();
        Mat la(sp.d, sp.d), lb(sp.d, sp.d);
        for (int r = 0; r < sp.d; ++r)
            for (int c = 0; c < sp.d; ++c) {
                la(r, c) = r == c ? 0.0 : u(rng);
                lb(r, c) = r == c ? 0.0 : la(r, c) + 0.1 * u(rng);
            }
        JumpKernel ka(sp, la), kb(sp, lb);
        bool int_ok = true;
        for (double eta : {0.1, 1.0, 10.0}) {
            auto rep = integral_inequality_check(
                g, [&](double) { return ka; }, [&](double) { return kb; }, rho0, sigma0, eta,
                ctx.config.value("t_end", 1.0), ctx.config.value("dt", 1e-3));
            int_ok = int_ok && rep.holds && rep.sharp_holds;
        }
        j["integral_inequality_ok"] = int_ok;
        ctx.record("integral_inequality", int_ok);
    }
    write_json(ctx, "report.json", j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field jump process laboratory"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::int64_t seed_override = -1;
    const std::vector<std::string> experiments = {
        "solve-mf",       "solve-averaged",     "master",            "simulate",
        "chaos-experiment", "concentration-test", "verify-conditions", "inequality-suite"};
    for (const std::string& name : experiments) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed_override, "seed override");
        sub->add_option("--out", out_dir, "output directory");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string experiment = app.get_subcommands().front()->get_name();

    RunContext ctx;
    try {
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("cannot open config: " + config_path);
        ctx.config = Json::parse(in);
        ctx.seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                                      : ctx.config.value("seed", 0ULL);
        const bool stochastic = experiment == "simulate" || experiment == "concentration-test";
        if (stochastic && seed_override < 0 && !ctx.config.contains("seed"))
            throw std::invalid_argument("seed is mandatory for stochastic experiments");
        Json hashed = ctx.config;
        hashed["experiment"] = experiment;
        if (seed_override >= 0) hashed["seed"] = seed_override;
        ctx.out_dir = out_dir.empty() ? fs::path("runs") / config_hash(hashed)
                                      : fs::path(out_dir);
        fs::create_directories(ctx.out_dir);
        ctx.manifest["experiment"] = experiment;
        ctx.manifest["config_hash"] = config_hash(hashed);
        ctx.manifest["version"] = "0.1.0";
        ctx.manifest["artifacts"] = Json::array();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        auto t0 = std::chrono::steady_clock::now();
        if (experiment == "solve-mf")
            run_solve(ctx, EvolMode::meanfield);
        else if (experiment == "solve-averaged")
            run_solve(ctx, EvolMode::averaged);
        else if (experiment == "master")
            run_master(ctx);
        else if (experiment == "simulate")
            run_simulate(ctx);
        else if (experiment == "chaos-experiment")
            run_chaos(ctx);
        else if (experiment == "concentration-test")
            run_concentration(ctx);
        else if (experiment == "verify-conditions")
            run_verify(ctx);
        else if (experiment == "inequality-suite")
            run_inequalities(ctx);
        auto t1 = std::chrono::steady_clock::now();
        ctx.manifest["wall_clock_seconds"] =
            std::chrono::duration<double>(t1 - t0).count();
        ctx.manifest["pass"] = ctx.all_pass;
        {
            std::ofstream os(ctx.out_dir / "manifest.json");
            os << ctx.manifest.dump(2) << "\n";
        }
        if (!ctx.all_pass) {
            std::cerr << "assertion failure; see " << (ctx.out_dir / "manifest.json") << "\n";
            return 1;
        }
        std::cout << "ok: " << ctx.out_dir.string() << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
