#include "sigma_skew/rng.hpp"

#include <cmath>
#include <numbers>

namespace sigma_skew {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key)
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t replicate)
{
    std::uint64_t h = mix64(master);
    h = mix64(h ^ static_cast<std::uint64_t>(tag));
    return mix64(h ^ replicate);
}

CounterRng::CounterRng(std::uint64_t seed) noexcept
    : seed_(seed)
    , key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
{
}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index, std::uint64_t stream) const noexcept
{
    return philox4x32_10({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
                         key_);
}

std::pair<double, double> CounterRng::uniform_pair(std::uint64_t index, std::uint64_t stream) const noexcept
{
    const auto w = block(index, stream);
    return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
}

double CounterRng::uniform(std::uint64_t index, std::uint64_t stream) const noexcept
{
    return uniform_pair(index, stream).first;
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t index, std::uint64_t stream) const noexcept
{
    const auto [u0, u1] = uniform_pair(index, stream);
    // 1 - u0 lies in (0, 1], so the log is finite.
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u0));
    const double angle = 2.0 * std::numbers::pi * u1;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

} // namespace sigma_skew
