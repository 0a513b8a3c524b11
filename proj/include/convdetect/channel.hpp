#pragma once

#include "convdetect/bits.hpp"
#include "convdetect/codes.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>

namespace convdetect {

/// BSC crossover probability, 0 <= eps <= 0.5.
struct ChannelParams {
    double epsilon = 0.0;

    explicit ChannelParams(double eps) : epsilon(eps)
    {
        if (!(eps >= 0.0 && eps <= 0.5)) {
            throw std::invalid_argument("ChannelParams: epsilon must lie in [0, 0.5]");
        }
    }
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Addressable random stream: (seed, stream index) names a fixed bit sequence.
/// Child streams are derived hierarchically so per-trial randomness does not
/// depend on which worker runs the trial.
class RngStream {
public:
    static constexpr std::uint64_t default_seed = 20240901ULL;

    constexpr explicit RngStream(std::uint64_t seed = default_seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream)
    {
    }

    constexpr std::uint64_t seed() const { return seed_; }
    constexpr std::uint64_t stream() const { return stream_; }

    /// 64-bit key identifying this stream.
    constexpr std::uint64_t key() const { return splitmix64(seed_ ^ splitmix64(stream_ + 0x632BE59BD9B4E019ULL)); }

    constexpr RngStream child(std::uint64_t index) const { return RngStream(key(), index); }

    std::mt19937_64 engine() const { return std::mt19937_64(key()); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

inline Bits random_message(std::size_t steps, int k, const RngStream& rng)
{
    if (steps < 1 || k < 1) {
        throw std::invalid_argument("random_message: require N >= 1 and k >= 1");
    }
    auto eng = rng.engine();
    const std::size_t total = steps * static_cast<std::size_t>(k);
    Bits out(total);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if (i % 64 == 0) {
            word = eng();
        }
        out[i] = static_cast<std::uint8_t>(word & 1u);
        word >>= 1;
    }
    return out;
}

inline Bits bsc_apply(const Bits& bits, const ChannelParams& params, const RngStream& rng)
{
    Bits out = bits;
    if (params.epsilon == 0.0) {
        return out;
    }
    auto eng = rng.engine();
    for (auto& b : out) {
        if (uniform01(eng) < params.epsilon) {
            b ^= 1u;
        }
    }
    return out;
}

struct Sample {
    Bits message;
    Bits clean;
    Bits received;
};

/// Message from child stream 0, channel noise from child stream 1.
inline Sample generate_sample(const ConvCode& code, std::size_t steps, const ChannelParams& params,
                              const RngStream& rng)
{
    Sample s;
    s.message = random_message(steps, code.k(), rng.child(0));
    s.clean = encode(code, s.message);
    s.received = bsc_apply(s.clean, params, rng.child(1));
    return s;
}

} // namespace convdetect
