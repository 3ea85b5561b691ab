#pragma once

#include "sigma_skew/excursions.hpp"
#include "sigma_skew/path.hpp"
#include "sigma_skew/process.hpp"
#include "sigma_skew/sign_process.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace sigma_skew {

enum class Construction { direct, time_changed };

std::string to_string(Construction c);

/// A candidate weak solution y = sign * source.x of the skew Brownian motion
/// equation. `source` is the process the signs were drawn on: the input itself
/// for the direct construction, its time-changed image otherwise.
struct SkewSolution {
    Path y;
    SigmaProcess source;
    SignPath sign;
    ExcursionDecomposition excursions;
    AlphaSchedule schedule;
    Construction construction = Construction::direct;
    std::optional<Path> local_time_ref;
};

/// Relative tolerance on |qv_T - T| / T accepted as a Brownian clock.
inline constexpr double kBrownianClockTolerance = 0.05;

/// Flip the excursions of src.x with independent signs, without checking the
/// driver. zero_tol defaults to 0 for shipped generators and must be given
/// for custom processes.
SkewSolution flip_excursions(const SigmaProcess& src, const AlphaSchedule& schedule, std::uint64_t seed,
                             std::optional<double> zero_tol = std::nullopt);

/// Y = Z X for a source whose martingale part is a standard Brownian motion.
/// Throws ConstructionError when |qv_T - T| exceeds 5% of T plus six standard
/// deviations sqrt(2 dt T) of the realized qv of a Brownian driver.
SkewSolution build_direct(const SigmaProcess& src, const AlphaSchedule& schedule, std::uint64_t seed,
                          std::optional<double> zero_tol = std::nullopt);

/// Time-change the source to the Brownian clock first, then draw the signs
/// on the excursions of the time-changed path.
SkewSolution build_time_changed(const SigmaProcess& src, const AlphaSchedule& schedule, std::uint64_t seed,
                                double horizon);

/// D_i = sum_{j<i} (2 alpha(t_j) - 1) (L_{j+1} - L_j). W = y - D is the
/// candidate Brownian residual.
Path drift_ledger(const SkewSolution& sol, const Path& lt);
/// `t,D`
void write_drift_csv(std::ostream& out, const Path& drift);

/// Number of grid points where |y| differs from source.x.
std::size_t abs_mismatches(const SkewSolution& sol);

} // namespace sigma_skew
