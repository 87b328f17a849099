#include "mflab/config.hpp"

#include <cmath>
#include <sstream>

namespace mflab {

namespace {

Mat parse_matrix(const Json& j, int rows, int cols, const std::string& name) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw std::invalid_argument(name + ": expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const Json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw std::invalid_argument(name + ": expected " + std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
    }
    return m;
}

std::vector<double> parse_flat(const Json& j, std::size_t expect, const std::string& name) {
    std::vector<double> v = j.get<std::vector<double>>();
    if (v.size() != expect)
        throw std::invalid_argument(name + ": expected " + std::to_string(expect) + " entries");
    return v;
}

// named intensity library for the parametrized family
ParametrizedKernel::GammaFn make_gamma(const Json& j, const FiniteSpace& space) {
    const std::string form = j.at("lambda").at("form").get<std::string>();
    std::vector<double> coeffs = j.at("lambda").at("coeffs").get<std::vector<double>>();
    Mat P = parse_matrix(j.at("P"), space.d, space.d, "kernel.P");
    if (P.minCoeff() < 0.0) throw std::invalid_argument("kernel.P: negative entry");
    auto affine = [coeffs](const Vec& theta) {
        double v = coeffs.at(0);
        for (int i = 0; i < theta.size() && i + 1 < static_cast<int>(coeffs.size()) - 1; ++i)
            v += coeffs[i + 1] * theta[i];
        return v;
    };
    if (form == "affine-clamped") {
        double cap = coeffs.back();
        return [affine, cap, P](int x, const Vec& theta, int y) {
            return std::min(std::max(affine(theta), 0.0), cap) * P(x, y);
        };
    }
    if (form == "logistic") {
        double level = coeffs.back();
        return [affine, level, P](int x, const Vec& theta, int y) {
            return level / (1.0 + std::exp(-affine(theta))) * P(x, y);
        };
    }
    if (form == "exp-neg") {
        double level = coeffs.back();
        return [affine, level, P](int x, const Vec& theta, int y) {
            return level * std::exp(-std::max(affine(theta), 0.0)) * P(x, y);
        };
    }
    throw std::invalid_argument("kernel.lambda.form: unknown form '" + form + "'");
}

}  // namespace

FiniteSpace parse_space(const Json& j) {
    int d = j.at("d").get<int>();
    std::vector<double> nu = j.at("nu").get<std::vector<double>>();
    if (static_cast<int>(nu.size()) != d)
        throw std::invalid_argument("space.nu: size must equal d");
    Vec v(d);
    for (int x = 0; x < d; ++x) v[x] = nu[x];
    return FiniteSpace(d, v);
}

RateGenerator parse_generator(const Json& j, const FiniteSpace& space) {
    return RateGenerator(space, parse_matrix(j.at("q"), space.d, space.d, "generator.q"));
}

JumpKernel parse_jump_kernel(const Json& j, const FiniteSpace& space) {
    return JumpKernel(space, parse_matrix(j.at("lam"), space.d, space.d, "kernel.lam"));
}

std::shared_ptr<MeanFieldKernel> parse_kernel(const Json& j, const FiniteSpace& space) {
    const std::string family = j.at("family").get<std::string>();
    const int d = space.d;
    std::shared_ptr<MeanFieldKernel> kern;
    if (family == "constant") {
        kern = std::make_shared<ConstantKernel>(
            space, parse_matrix(j.at("lam"), d, d, "kernel.lam"));
    } else if (family == "two_three_body") {
        std::vector<double> g1 = parse_flat(j.at("gamma1"), static_cast<std::size_t>(d) * d * d,
                                            "kernel.gamma1");
        std::vector<double> g2(static_cast<std::size_t>(d) * d * d * d, 0.0);
        if (j.contains("gamma2"))
            g2 = parse_flat(j.at("gamma2"), g2.size(), "kernel.gamma2");
        double c1 = j.at("c1").get<double>();
        kern = std::make_shared<TwoThreeBodyKernel>(space, std::move(g1), std::move(g2), c1);
    } else if (family == "parametrized") {
        int k = j.at("k").get<int>();
        std::vector<double> kappa =
            parse_flat(j.at("kappa"), static_cast<std::size_t>(d) * d * k, "kernel.kappa");
        kern = std::make_shared<ParametrizedKernel>(
            space, k, std::move(kappa), make_gamma(j, space), j.value("m1", 0.0),
            j.value("m2", 0.0), j.value("m3", 0.0));
    } else {
        throw std::invalid_argument("kernel.family: unknown family '" + family + "'");
    }
    if (j.contains("constants")) {
        const Json& c = j.at("constants");
        if (c.contains("M_lambda")) kern->constants.M_lambda = c.at("M_lambda").get<double>();
        if (c.contains("M_lambda_star"))
            kern->constants.M_lambda_star = c.at("M_lambda_star").get<double>();
        if (c.contains("theta")) kern->constants.theta = c.at("theta").get<double>();
        if (c.contains("lipschitz_L1"))
            kern->constants.lipschitz_L1 = c.at("lipschitz_L1").get<double>();
    }
    return kern;
}

Density parse_density(const Json& j, const FiniteSpace& space, bool require_probability) {
    std::vector<double> w = j.get<std::vector<double>>();
    if (static_cast<int>(w.size()) != space.d)
        throw std::invalid_argument("density: size mismatch");
    Vec v(space.d);
    for (int x = 0; x < space.d; ++x) v[x] = w[x];
    if (require_probability) {
        double mass = v.dot(space.nu);
        if (mass <= 0.0) throw std::invalid_argument("density: zero mass");
        v /= mass;  // configs may give unnormalized weights
    }
    return Density(space, v, require_probability);
}

std::string config_hash(const Json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void require_finite(const Json& j, const std::string& where) {
    if (j.is_number_float()) {
        double v = j.get<double>();
        if (!std::isfinite(v))
            throw std::runtime_error("non-finite number in " + where);
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) require_finite(it.value(), where + "." + it.key());
    } else if (j.is_array()) {
        for (const auto& e : j) require_finite(e, where + "[]");
    }
}

}  // namespace mflab
