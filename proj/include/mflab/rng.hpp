#pragma once

#include <cstdint>
#include <random>

namespace mflab {

/// Counter-based seed derivation: independent streams from (base_seed, index)
/// via splitmix64 so partitioned Monte Carlo loops stay reproducible.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(base, index));
}

/// Samples an atom index from unnormalized weights.
template <typename VecT, typename Rng>
int sample_index(const VecT& weights, double total, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    int last = static_cast<int>(weights.size()) - 1;
    for (int i = 0; i < last; ++i) {
        if (r < weights[i]) return i;
        r -= weights[i];
    }
    return last;
}

}  // namespace mflab
