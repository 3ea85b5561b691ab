#pragma once

#include "sigma_skew/path.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sigma_skew {

enum class ProcessKind { abs_bm, drawdown, scaled_abs, product_abs, custom };

std::string to_string(ProcessKind kind);
/// Accepts both snake_case and the CLI spelling (abs-bm, product-abs, ...).
ProcessKind parse_process_kind(const std::string& text);

/// A continuous class-(Sigma) process X = M + A on a grid: x is X, driver is
/// the martingale part M and qv its quadratic variation clock <M,M>.
/// The finite-variation part is A = x - driver.
struct SigmaProcess {
    Path x;
    Path driver;
    Path qv;
    ProcessKind kind = ProcessKind::custom;
};

/// Throws ParameterError on any violated invariant: shared grid, x_0 = 0,
/// qv_0 = 0, qv nondecreasing.
void validate(const SigmaProcess& p);

/// Standard Brownian motion with B_0 = 0. Increment j is sqrt(dt) times the
/// normal addressed by (seed, index j / 2, stream = replicate).
Path generate_bm(std::size_t n_steps, double dt, std::uint64_t seed, std::uint64_t replicate = 0);

struct SigmaParams {
    /// Volatility schedule for scaled_abs: M_t = int sigma dB.
    StepFunction sigma = StepFunction::constant(1.0);
    /// Seed of the second, independent driver for product_abs.
    std::optional<std::uint64_t> second_seed;
    std::uint64_t replicate = 0;
};

SigmaProcess make_sigma_process(ProcessKind kind, std::size_t n_steps, double dt, std::uint64_t seed,
                                const SigmaParams& params = {});

/// |m| for a signed continuous martingale sample m. Zeros are placed at sign
/// changes first, driver is the discrete Tanaka sum sum sgn(m_j) dm_j with
/// sgn(0) = +1. When qv is empty the realized qv of the driver is used.
SigmaProcess abs_of_martingale(const Path& m, ProcessKind kind, std::optional<Path> qv = std::nullopt);

/// Drawdown S - B with S the running maximum; driver -B.
SigmaProcess drawdown_of(const Path& b);

/// |B1| * |B2| for independent drivers. Driver is
/// sum (|B1_j| dM2_j + |B2_j| dM1_j) with Mk the Tanaka drivers of |Bk|,
/// using the unsnapped magnitudes so the integrands stay adapted.
SigmaProcess product_of(const Path& b1, const Path& b2);

/// Martingale int sigma dB with sigma sampled at the left end of each step,
/// and its deterministic clock int sigma^2 ds.
struct ScaledMartingale {
    Path m;
    Path qv;
};
ScaledMartingale scale_martingale(const Path& b, const StepFunction& sigma);

/// Grid indices realising tau_t for t = k * dt_new, k = 0..n where
/// n = round(horizon / dt_new): the first original index whose qv is >= t.
/// Throws InsufficientQvError when qv never reaches the horizon.
std::vector<std::size_t> time_change_indices(const Path& qv, double horizon, double dt_new);

/// Y_t = X_{tau_t} on a uniform grid of the new clock with the original dt.
/// Driver and qv are re-indexed identically; no value is interpolated.
SigmaProcess time_change(const SigmaProcess& p, double horizon);

} // namespace sigma_skew
