#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mflab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

/// Finite state space: d atoms with a strictly positive reference measure nu.
/// nu is an arbitrary finite positive measure, not necessarily normalized.
struct FiniteSpace {
    int d = 0;
    Vec nu;

    FiniteSpace() = default;
    FiniteSpace(int d_, Vec nu_);

    static FiniteSpace uniform(int d, double weight = 1.0);

    double nu_total() const { return nu.sum(); }

    bool operator==(const FiniteSpace& o) const {
        return d == o.d && nu == o.nu;
    }
};

/// Nonnegative weight-per-atom vector; represents rho in L1(nu).
/// When `probability` is set the nu-weighted mass must be 1.
struct Density {
    FiniteSpace space;
    Vec w;

    Density() = default;
    Density(FiniteSpace space_, Vec w_, bool require_probability = false);

    double mass() const { return w.dot(space.nu); }
    /// Atom masses rho({x}) = w[x] * nu[x].
    Vec masses() const { return w.cwiseProduct(space.nu); }

    static Density uniform(const FiniteSpace& space);
    /// Point mass at atom x as a density w.r.t. nu.
    static Density delta(const FiniteSpace& space, int x);
};

struct SignedMeasure {
    FiniteSpace space;
    Vec m;  // mass per atom

    SignedMeasure() = default;
    SignedMeasure(FiniteSpace space_, Vec m_);

    static SignedMeasure delta(const FiniteSpace& space, int x);
};

/// Empirical measure of n particles: counts per atom, mass counts/n.
struct EmpiricalMeasure {
    FiniteSpace space;
    IVec counts;
    int n = 0;

    EmpiricalMeasure() = default;
    EmpiricalMeasure(FiniteSpace space_, IVec counts_);

    /// Probability masses counts[x]/n.
    Vec masses() const;
};

double pair(const SignedMeasure& mu, const Vec& phi);
double pair_nu(const Vec& psi, const Vec& phi, const FiniteSpace& space);
double tv_norm(const SignedMeasure& mu);
/// max f - min f; invariant under adding constants.
double oscillation(const Vec& f);

EmpiricalMeasure empirical_of(const FiniteSpace& space, const std::vector<int>& config);
/// Removes the k-th entry (1-based, matching particle indexing).
std::vector<int> truncate(const std::vector<int>& config, int k);

/// Number of compositions of n into d nonnegative parts: C(n+d-1, d-1).
std::uint64_t composition_count(int n, int d);

/// Enumerates every empirical measure with total count n in lexicographic
/// order of the count vector, together with its multinomial weight
/// n!/(prod counts[x]!). Weights sum to d^n.
/// Throws if the composition count exceeds `cap`.
void enumerate_empiricals(const FiniteSpace& space, int n,
                          const std::function<void(const IVec& counts, double multinomial_weight)>& visit,
                          std::uint64_t cap = 10'000'000);

}  // namespace mflab
