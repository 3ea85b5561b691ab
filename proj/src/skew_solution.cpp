#include "sigma_skew/skew_solution.hpp"

#include "sigma_skew/errors.hpp"

#include <cmath>
#include <ostream>
#include <cstdio>

namespace sigma_skew {

std::string to_string(Construction c)
{
    return c == Construction::direct ? "direct" : "time_changed";
}

SkewSolution flip_excursions(const SigmaProcess& src, const AlphaSchedule& schedule, std::uint64_t seed,
                             std::optional<double> zero_tol)
{
    validate(src);
    if (!zero_tol && src.kind == ProcessKind::custom)
        throw ParameterError("custom processes need an explicit zero_tol");

    SkewSolution sol;
    sol.source = src;
    sol.schedule = schedule;
    sol.excursions = decompose(src.x, zero_tol.value_or(0.0));
    sol.sign = sample_z_alpha_schedule(sol.excursions, schedule, src.x.t0, src.x.dt, seed);
    sol.y = Path{src.x.t0, src.x.dt, std::vector<double>(src.x.size()), "y"};
    for (std::size_t i = 0; i < src.x.size(); ++i)
        sol.y.values[i] = sol.sign.values[i] == 0 ? 0.0 : sol.sign.values[i] * src.x.values[i];
    return sol;
}

SkewSolution build_direct(const SigmaProcess& src, const AlphaSchedule& schedule, std::uint64_t seed,
                          std::optional<double> zero_tol)
{
    validate(src);
    const double horizon = src.x.horizon() - src.x.t0;
    const double terminal = src.qv.back();
    // Realized qv of a true Brownian driver has sd sqrt(2 dt T); allow six of
    // those on top of the relative tolerance so genuine drivers are not rejected.
    const double allowance = kBrownianClockTolerance * horizon + 6.0 * std::sqrt(2.0 * src.x.dt * horizon);
    if (!(horizon > 0.0) || std::abs(terminal - horizon) > allowance)
        throw ConstructionError("martingale part is not a standard Brownian motion; use build_time_changed");
    return flip_excursions(src, schedule, seed, zero_tol);
}

SkewSolution build_time_changed(const SigmaProcess& src, const AlphaSchedule& schedule, std::uint64_t seed,
                                double horizon)
{
    const SigmaProcess changed = time_change(src, horizon);
    SkewSolution sol = flip_excursions(changed, schedule, seed, 0.0);
    sol.construction = Construction::time_changed;
    return sol;
}

Path drift_ledger(const SkewSolution& sol, const Path& lt)
{
    validate(lt);
    require_aligned(sol.y, lt, "solution and local time");
    if (lt.values[0] != 0.0)
        throw ParameterError("local time must start at 0");
    for (std::size_t j = 0; j + 1 < lt.size(); ++j)
        if (lt.values[j + 1] < lt.values[j])
            throw ParameterError("local time must be nondecreasing");

    // Increments are grouped per schedule interval, so on each interval the
    // drift is (2 alpha_k - 1) times a single difference of L.
    Path d{lt.t0, lt.dt, std::vector<double>(lt.size(), 0.0), "drift"};
    CompensatedSum closed;
    std::size_t start = 0;
    std::size_t interval = sol.schedule.interval_of(lt.time(0));
    for (std::size_t j = 0; j + 1 < lt.size(); ++j) {
        const std::size_t k = sol.schedule.interval_of(lt.time(j));
        if (k != interval) {
            closed.add((2.0 * sol.schedule.level(interval) - 1.0) * (lt.values[j] - lt.values[start]));
            start = j;
            interval = k;
        }
        d.values[j + 1] =
            closed.value() + (2.0 * sol.schedule.level(interval) - 1.0) * (lt.values[j + 1] - lt.values[start]);
    }
    return d;
}

std::size_t abs_mismatches(const SkewSolution& sol)
{
    if (sol.y.size() != sol.source.x.size())
        return std::max(sol.y.size(), sol.source.x.size());
    std::size_t count = 0;
    for (std::size_t i = 0; i < sol.y.size(); ++i)
        if (std::abs(sol.y.values[i]) != sol.source.x.values[i])
            ++count;
    return count;
}

void write_drift_csv(std::ostream& out, const Path& drift)
{
    out << "t,D\n";
    char buf[64];
    for (std::size_t i = 0; i < drift.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", drift.time(i), drift.values[i]);
        out << buf;
    }
}

} // namespace sigma_skew
