#pragma once

#include "sigma_skew/path.hpp"
#include "sigma_skew/process.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace sigma_skew {

enum class LocalTimeMethod { band, tanaka };

std::string to_string(LocalTimeMethod m);

/// Symmetric local time at level 0. lt is nondecreasing with lt[0] = 0.
struct LocalTimeEstimate {
    Path lt;
    LocalTimeMethod method = LocalTimeMethod::tanaka;
    double eps = 0.0;
    /// Unmonotonised Tanaka residual (tanaka method only).
    std::optional<Path> raw;
};

/// Occupation estimator in the qv clock:
/// L_i = 1/(2 eps) * sum_{j<i} 1{|x_j| <= eps} (qv_{j+1} - qv_j).
LocalTimeEstimate lt_band(const Path& x, const Path& qv, double eps);

/// sqrt(terminal qv / number of steps where qv moves), i.e. sqrt(dt) scaled by
/// the per-unit-time qv on a regular clock. Falls back to sqrt(dt) for a flat clock.
double default_band_eps(const Path& qv);

/// Running maximum of |x_i| - |x_0| - sum_{j<i} sgn(x_j) (x_{j+1} - x_j)
/// with sgn(0) = +1.
LocalTimeEstimate lt_tanaka(const Path& x);

/// The finite-variation part A = x - driver of a shipped nonnegative
/// generator, monotonised. For |m| generators this is the Tanaka residual of
/// the underlying signed path; for the drawdown it is the running maximum.
LocalTimeEstimate lt_compensator(const SigmaProcess& p);

/// `t,lt,method,eps`
void write_csv(std::ostream& out, const LocalTimeEstimate& est);

} // namespace sigma_skew
