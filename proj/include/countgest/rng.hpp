#pragma once

#include <cstdint>
#include <vector>

namespace countgest {

/// Deterministic pseudo-random generator: xoshiro256++ with splitmix64
/// seeding. All draws are built from raw 64-bit outputs, never from the
/// standard library distributions, so a 64-bit seed reproduces the same
/// stream on every platform. `derive` gives statistically disjoint child
/// streams (training data vs test data vs weight init).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53 random bits.
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Unbiased uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_below(std::uint64_t n);

    /// Child generator with a stream id mixed into the seed.
    Rng derive(std::uint64_t stream) const;

    /// Fisher-Yates shuffle using this generator.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t state_[4] = {};
};

} // namespace countgest
