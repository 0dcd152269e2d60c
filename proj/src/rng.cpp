#include "mlc/rng.hpp"

#include <stdexcept>

namespace mlc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(~stream));
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
}

double Rng::uniform(double lo, double hi) {
    if (lo > hi)
        throw std::invalid_argument("Rng::uniform: lo " + std::to_string(lo) +
                                    " exceeds hi " + std::to_string(hi));
    return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be >= 1");
    // Reject the low 2^64 mod n draws so the modulus is exactly uniform.
    const std::uint64_t min = (0 - n) % n;  // 2^64 mod n in 64-bit arithmetic
    std::uint64_t x;
    do {
        x = gen_();
    } while (x < min);
    return x % n;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(below(i));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

Matrix Rng::uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
    if (lo > hi)
        throw std::invalid_argument("Rng::uniform_matrix: lo " + std::to_string(lo) +
                                    " exceeds hi " + std::to_string(hi));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = lo + (hi - lo) * uniform();
    return m;
}

}  // namespace mlc
