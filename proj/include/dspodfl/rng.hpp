#pragma once

#include <cmath>
#include <cstdint>

namespace dspodfl {

// Counter-based keyed generator. Every draw is addressed by
// (seed, stream, iteration, entity, counter), so any single iteration's
// randomness can be re-materialized without replaying the run.
namespace rng {

enum class Stream : uint64_t {
    Coordinates   = 0x01,
    SubSeed       = 0x02,
    ProfileD      = 0x03,
    ProfileB      = 0x04,
    SgdIndicator  = 0x05,
    LinkIndicator = 0x06,
    Noise         = 0x07,
    Batch         = 0x08,
    Init          = 0x09,
    Shuffle       = 0x0a,
    Test          = 0xf0,
};

inline uint64_t splitmix64(uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t word(uint64_t seed, Stream stream, uint64_t iteration,
                     uint64_t entity, uint64_t counter = 0)
{
    uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ull);
    h = splitmix64(h ^ static_cast<uint64_t>(stream));
    h = splitmix64(h ^ iteration);
    h = splitmix64(h ^ entity);
    h = splitmix64(h ^ counter);
    return h;
}

// uniform in [0, 1)
inline double uniform01(uint64_t seed, Stream stream, uint64_t iteration,
                        uint64_t entity, uint64_t counter = 0)
{
    return static_cast<double>(word(seed, stream, iteration, entity, counter) >> 11)
           * 0x1.0p-53;
}

inline bool bernoulli(double p, uint64_t seed, Stream stream, uint64_t iteration,
                      uint64_t entity, uint64_t counter = 0)
{
    return uniform01(seed, stream, iteration, entity, counter) < p;
}

// standard normal via Box-Muller; consumes counters 2c and 2c+1
inline double gaussian(uint64_t seed, Stream stream, uint64_t iteration,
                       uint64_t entity, uint64_t counter = 0)
{
    const uint64_t w1 = word(seed, stream, iteration, entity, 2 * counter);
    const uint64_t w2 = word(seed, stream, iteration, entity, 2 * counter + 1);
    const double u1 = (static_cast<double>(w1 >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(w2 >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// uniform integer in [0, n)
inline uint64_t uniform_index(uint64_t n, uint64_t seed, Stream stream,
                              uint64_t iteration, uint64_t entity,
                              uint64_t counter = 0)
{
    return static_cast<uint64_t>(uniform01(seed, stream, iteration, entity, counter)
                                 * static_cast<double>(n));
}

// derive an independent sub-seed (for rejection attempts, per-run streams, ...)
inline uint64_t subseed(uint64_t seed, uint64_t index)
{
    return word(seed, Stream::SubSeed, index, 0);
}

}  // namespace rng
}  // namespace dspodfl
