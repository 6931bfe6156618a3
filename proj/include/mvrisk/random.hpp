#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mvrisk {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small counter-keyed generator satisfying UniformRandomBitGenerator.
// A stream is a pure function of its key, so any (seed, arm, time) cell of a
// reward table can be regenerated without touching any other cell.
class CounterStream
{
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterStream(std::uint64_t key) noexcept : state_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Key for the reward of `arm` at round `t` (1-based) of the episode seeded `seed`.
constexpr std::uint64_t reward_key(std::uint64_t seed, std::uint64_t arm, std::uint64_t t) noexcept
{
    return mix64(mix64(mix64(seed ^ 0x5bd1e9955bd1e995ULL) ^ (arm + 1)) ^ t);
}

// Salt separating a policy's private stream from every reward stream.
constexpr std::uint64_t policy_key(std::uint64_t seed) noexcept
{
    return mix64(seed ^ 0xa0761d6478bd642fULL) ^ 0xe7037ed1a0b428dbULL;
}

using RngState = std::mt19937_64;

// Uniform on [0, 1) from the top 53 bits of a 64-bit generator.
inline double uniform01(auto& g)
{
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

} // namespace mvrisk
