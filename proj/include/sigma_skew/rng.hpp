#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace sigma_skew {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Stateless: the output is a pure function of counter and key.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer. Used only to derive independent keys.
std::uint64_t mix64(std::uint64_t z);

/// Stream tags for seed derivation. Values are part of the reproducibility
/// contract recorded in campaign manifests; never renumber.
enum class StreamTag : std::uint64_t {
    driver = 1,
    second_driver = 2,
    sign = 3,
    membership_sign = 4,
};

/// Key for (master seed, tag, replicate).
std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t replicate);

// Counter-based generator keyed by a 64-bit seed. Every draw is addressed by
// (index, stream) so results never depend on call order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept;

    std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint64_t stream) const noexcept;

    /// Two independent uniforms in [0, 1) with 53-bit resolution.
    std::pair<double, double> uniform_pair(std::uint64_t index, std::uint64_t stream) const noexcept;

    double uniform(std::uint64_t index, std::uint64_t stream) const noexcept;

    /// Two independent standard normals via Box-Muller.
    std::pair<double, double> normal_pair(std::uint64_t index, std::uint64_t stream) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::array<std::uint32_t, 2> key_;
};

} // namespace sigma_skew
