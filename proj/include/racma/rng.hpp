#pragma once

#include <cstdint>
#include <random>

namespace racma
{
    using Rng = std::mt19937_64;

    /// Independent sub-streams drawn inside one iteration.
    enum class StreamPurpose : std::uint64_t
    {
        sampling = 1,
        noise = 2,
        rounding = 3,
        selection = 4,
        monte_carlo = 5,
    };

    /// SplitMix64 finalizer; a bijective 64-bit mixer.
    std::uint64_t mix64(std::uint64_t x);

    /// Hash an ordered triple of keys into a 64-bit seed.
    std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

    /**
     * Keyed stream factory. A stream is fully determined by (seed, iteration, purpose),
     * so sampling, noise and rounding draws never share state and any iteration can be
     * replayed in isolation.
     */
    class StreamFactory
    {
    public:
        explicit StreamFactory(std::uint64_t seed = 0) : seed_(seed) {}

        [[nodiscard]] Rng stream(std::uint64_t iteration, StreamPurpose purpose) const;

        /// Factory for a nested experiment (e.g. trial k of a run).
        [[nodiscard]] StreamFactory child(std::uint64_t index) const;

        [[nodiscard]] std::uint64_t seed() const { return seed_; }

    private:
        std::uint64_t seed_;
    };

    inline double standard_normal(Rng& rng)
    {
        return std::normal_distribution<double>(0.0, 1.0)(rng);
    }

    inline double uniform01(Rng& rng)
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
}
