#include "mflab/space.hpp"

#include <cmath>

namespace mflab {

FiniteSpace::FiniteSpace(int d_, Vec nu_) : d(d_), nu(std::move(nu_)) {
    if (d < 1) throw std::invalid_argument("FiniteSpace: d must be >= 1");
    if (nu.size() != d) throw std::invalid_argument("FiniteSpace: nu size mismatch");
    for (int x = 0; x < d; ++x)
        if (!(nu[x] > 0.0)) throw std::invalid_argument("FiniteSpace: nu must be strictly positive");
}

FiniteSpace FiniteSpace::uniform(int d, double weight) {
    return FiniteSpace(d, Vec::Constant(d, weight));
}

Density::Density(FiniteSpace space_, Vec w_, bool require_probability)
    : space(std::move(space_)), w(std::move(w_)) {
    if (w.size() != space.d) throw std::invalid_argument("Density: dimension mismatch");
    for (int x = 0; x < space.d; ++x)
        if (w[x] < 0.0) throw std::invalid_argument("Density: negative weight");
    if (require_probability && std::abs(mass() - 1.0) > 1e-10)
        throw std::invalid_argument("Density: mass != 1");
}

Density Density::uniform(const FiniteSpace& space) {
    return Density(space, Vec::Constant(space.d, 1.0 / space.nu_total()));
}

Density Density::delta(const FiniteSpace& space, int x) {
    Vec w = Vec::Zero(space.d);
    w[x] = 1.0 / space.nu[x];
    return Density(space, w);
}

SignedMeasure::SignedMeasure(FiniteSpace space_, Vec m_)
    : space(std::move(space_)), m(std::move(m_)) {
    if (m.size() != space.d) throw std::invalid_argument("SignedMeasure: dimension mismatch");
}

SignedMeasure SignedMeasure::delta(const FiniteSpace& space, int x) {
    Vec m = Vec::Zero(space.d);
    m[x] = 1.0;
    return SignedMeasure(space, m);
}

EmpiricalMeasure::EmpiricalMeasure(FiniteSpace space_, IVec counts_)
    : space(std::move(space_)), counts(std::move(counts_)) {
    if (counts.size() != space.d) throw std::invalid_argument("EmpiricalMeasure: dimension mismatch");
    n = 0;
    for (int x = 0; x < space.d; ++x) {
        if (counts[x] < 0) throw std::invalid_argument("EmpiricalMeasure: negative count");
        n += counts[x];
    }
    if (n < 1) throw std::invalid_argument("EmpiricalMeasure: needs at least one particle");
}

Vec EmpiricalMeasure::masses() const {
    return counts.cast<double>() / static_cast<double>(n);
}

double pair(const SignedMeasure& mu, const Vec& phi) {
    if (phi.size() != mu.m.size()) throw std::invalid_argument("pair: dimension mismatch");
    return mu.m.dot(phi);
}

double pair_nu(const Vec& psi, const Vec& phi, const FiniteSpace& space) {
    if (psi.size() != space.d || phi.size() != space.d)
        throw std::invalid_argument("pair_nu: dimension mismatch");
    return (psi.array() * phi.array() * space.nu.array()).sum();
}

double tv_norm(const SignedMeasure& mu) { return mu.m.cwiseAbs().sum(); }

double oscillation(const Vec& f) { return f.maxCoeff() - f.minCoeff(); }

EmpiricalMeasure empirical_of(const FiniteSpace& space, const std::vector<int>& config) {
    if (config.empty()) throw std::invalid_argument("empirical_of: empty configuration");
    IVec counts = IVec::Zero(space.d);
    for (int x : config) {
        if (x < 0 || x >= space.d) throw std::invalid_argument("empirical_of: index out of range");
        counts[x] += 1;
    }
    return EmpiricalMeasure(space, counts);
}

std::vector<int> truncate(const std::vector<int>& config, int k) {
    if (k < 1 || k > static_cast<int>(config.size()))
        throw std::invalid_argument("truncate: k out of range");
    std::vector<int> out;
    out.reserve(config.size() - 1);
    for (int i = 0; i < static_cast<int>(config.size()); ++i)
        if (i != k - 1) out.push_back(config[i]);
    return out;
}

std::uint64_t composition_count(int n, int d) {
    // C(n+d-1, d-1) with overflow saturation
    std::uint64_t result = 1;
    for (int i = 1; i <= d - 1; ++i) {
        // multiply by (n + i) then divide by i; guard overflow
        std::uint64_t factor = static_cast<std::uint64_t>(n) + i;
        if (result > UINT64_MAX / factor) return UINT64_MAX;
        result = result * factor / i;
    }
    return result;
}

void enumerate_empiricals(const FiniteSpace& space, int n,
                          const std::function<void(const IVec&, double)>& visit,
                          std::uint64_t cap) {
    if (n < 1) throw std::invalid_argument("enumerate_empiricals: n must be >= 1");
    const std::uint64_t total = composition_count(n, space.d);
    if (total > cap)
        throw std::runtime_error(
            "enumerate_empiricals: composition count exceeds cap; use Monte Carlo mode");
    // log-factorial table for multinomial weights
    std::vector<double> lfact(n + 1, 0.0);
    for (int i = 2; i <= n; ++i) lfact[i] = lfact[i - 1] + std::log(static_cast<double>(i));

    IVec counts = IVec::Zero(space.d);
    // lexicographic enumeration over count vectors (first coordinate most significant,
    // descending from n keeps the order stable across runs)
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == space.d - 1) {
            counts[pos] = remaining;
            double logw = lfact[n];
            for (int x = 0; x < space.d; ++x) logw -= lfact[counts[x]];
            visit(counts, std::exp(logw));
            return;
        }
        for (int c = remaining; c >= 0; --c) {
            counts[pos] = c;
            rec(pos + 1, remaining - c);
        }
    };
    rec(0, n);
}

}  // namespace mflab
