#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mlc/matrix.hpp"

namespace mlc {

/// Seeded pseudo-random source. The generator is std::mt19937_64 (the 64-bit
/// Mersenne Twister, whose raw output stream for a given seed is fixed by the
/// C++ standard), and every derived draw -- unit doubles, bounded integers,
/// shuffles -- is built here from that raw stream rather than from
/// std::*_distribution, whose output is implementation-defined. Identical
/// seeds therefore give identical streams on any conforming toolchain.
///
/// Single-owner: an Rng must not be shared across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Independent-stream constructor: mixes (seed, stream) through splitmix64
    /// so that e.g. per-repeat or per-label generators do not overlap.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi). Requires lo <= hi; lo == hi returns lo.
    double uniform(double lo, double hi);

    /// Unbiased integer in [0, n) via rejection sampling. Requires n >= 1.
    std::uint64_t below(std::uint64_t n);

    /// Uniform random permutation of 0..n-1 (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n);

    Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi);

private:
    std::mt19937_64 gen_;
};

/// splitmix64 mixing step; also used to derive sub-seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// The (seed, stream) mix behind Rng::derive, exposed for callers that need
/// plain derived seeds (per-label learners, per-repeat splits, grid points).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mlc
