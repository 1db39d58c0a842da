// rng.hpp: Philox4x32-10 counter-based generator
//
// Every trajectory owns an independent stream keyed by the run seed, with the
// trajectory index in the upper counter words, so streams do not depend on
// scheduling.

#pragma once

#include <array>
#include <cstdint>

namespace polariton {

using philox_ctr = std::array<std::uint32_t, 4>;
using philox_key = std::array<std::uint32_t, 2>;

inline philox_ctr philox4x32_10(philox_ctr ctr, philox_key key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(trajectory) {}

    // Uniform double in (0, 1), 53 random bits.
    double uniform() {
        if (used_ >= 2) refill();
        const std::uint64_t hi = block_[2 * used_], lo = block_[2 * used_ + 1];
        ++used_;
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() {
        block_ = philox4x32_10({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                               key_);
        ++counter_;
        used_ = 0;
    }

    philox_key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    philox_ctr block_{};
    int used_ = 2;
};

} // namespace polariton
