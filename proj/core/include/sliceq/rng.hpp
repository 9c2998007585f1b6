#ifndef SLICEQ_RNG_HPP
#define SLICEQ_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace sliceq {

/// splitmix64 mixing step; used to derive independent sub-seeds from a base
/// seed plus structural indices so results do not depend on loop order.
std::uint64_t mix_seed(std::uint64_t seed);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c);

/// A shuffled permutation of {0..n-1}, Fisher-Yates over mt19937_64 with
/// explicit modulo draws. Identical output for identical (n, seed) on every
/// platform.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

/// Standard-normal draw with fixed Box-Muller implementation (the library
/// normal_distribution is implementation-defined, this one is portable).
class NormalDraw {
public:
    explicit NormalDraw(std::uint64_t seed) : rng_(seed) {}
    explicit NormalDraw(std::mt19937_64 rng) : rng_(rng) {}

    double next();
    double uniform();  ///< in [0,1)

private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sliceq

#endif  // SLICEQ_RNG_HPP
