#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cosetsle {

// ---------------------------------------------------------------------------
// Philox4x32-10 counter-based generator (Salmon et al. construction).
// Stateless block function: 128-bit counter + 64-bit key -> 128 random bits.
// Substreams are carved out of the counter space, so any (sample, curve,
// channel) tuple owns an independent stream and results merge regardless of
// how samples are scheduled across workers.
// ---------------------------------------------------------------------------

using philox_ctr = std::array<std::uint32_t, 4>;
using philox_key = std::array<std::uint32_t, 2>;

namespace detail {

inline void philox_round(philox_ctr& x, const philox_key& k) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = M0 * x[0];
    const std::uint64_t p1 = M1 * x[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

}  // namespace detail

inline philox_ctr philox4x32(philox_ctr ctr, philox_key key) {
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(ctr, key);
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// Stream of N(0,1) variates addressed by (seed, stream id).  Each Philox
/// block yields one Box-Muller pair; the block index is the low counter
/// word, the stream id fills the high words.  Consuming k variates always
/// produces the same sequence for the same (seed, stream), independent of
/// any other stream.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const philox_ctr out = philox4x32(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             stream_lo_, stream_hi_},
            key_);
        ++block_;
        const double u1 = to_unit_open(out[0], out[1]);   // (0,1]
        const double u2 = to_unit_closed(out[2], out[3]); // [0,1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    /// Uniform in [0,1); advances the stream by one block.
    double next_uniform() {
        const philox_ctr out = philox4x32(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             stream_lo_, stream_hi_},
            key_);
        ++block_;
        return to_unit_closed(out[0], out[1]);
    }

private:
    static double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return (static_cast<double>(v) + 1.0) * 0x1p-64;  // never 0
    }
    static double to_unit_closed(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return static_cast<double>(v) * 0x1p-64;
    }

    philox_key key_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t block_{0};
    double spare_{0.0};
    bool have_spare_{false};
};

/// Stream-id layout used by the simulators: one substream per
/// (sample, curve, channel).  Channel 0 is the real driving noise,
/// channels 1..dim are the Lie-direction noises.
inline std::uint64_t stream_id(std::uint64_t sample, unsigned curve, unsigned channel) {
    return (sample << 16) | (static_cast<std::uint64_t>(curve) << 8) | channel;
}

}  // namespace cosetsle
