#include "sigma_skew/sign_process.hpp"

#include "sigma_skew/errors.hpp"
#include "sigma_skew/rng.hpp"

#include <ostream>

namespace sigma_skew {

AlphaSchedule::AlphaSchedule(StepFunction f)
    : f_(std::move(f))
{
    for (double a : f_.levels())
        if (!(a >= 0.0 && a <= 1.0))
            throw ParameterError("alpha out of [0,1]");
}

AlphaSchedule AlphaSchedule::constant(double alpha)
{
    return AlphaSchedule(StepFunction::constant(alpha));
}

AlphaSchedule AlphaSchedule::parse(const std::string& text)
{
    return AlphaSchedule(StepFunction::parse(text));
}

int draw_sign(std::uint64_t seed, std::size_t interval, std::size_t excursion, double alpha)
{
    const CounterRng rng(seed);
    return rng.uniform(excursion, interval) < alpha ? 1 : -1;
}

SignPath sample_z_alpha(const ExcursionDecomposition& dec, double alpha, std::uint64_t seed)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ParameterError("alpha out of [0,1]");
    SignPath sp;
    sp.seed = seed;
    sp.values.assign(dec.size(), 0);
    sp.excursion_signs.reserve(dec.intervals.size());
    for (std::size_t n = 0; n < dec.intervals.size(); ++n) {
        const auto& e = dec.intervals[n];
        const int zeta = draw_sign(seed, 0, n, alpha);
        sp.excursion_signs.push_back({n, 0, zeta});
        for (std::size_t j = e.first(); j < e.end(); ++j)
            sp.values[j] = static_cast<std::int8_t>(zeta);
    }
    return sp;
}

SignPath sample_z_alpha_schedule(const ExcursionDecomposition& dec, const AlphaSchedule& schedule, double t0,
                                 double dt, std::uint64_t seed)
{
    if (!(dt > 0.0))
        throw ParameterError("dt must be positive");
    SignPath sp;
    sp.seed = seed;
    sp.values.assign(dec.size(), 0);
    for (std::size_t n = 0; n < dec.intervals.size(); ++n) {
        const auto& e = dec.intervals[n];
        std::size_t current = static_cast<std::size_t>(-1);
        int zeta = 0;
        for (std::size_t j = e.first(); j < e.end(); ++j) {
            const std::size_t i = schedule.interval_of(t0 + static_cast<double>(j) * dt);
            if (i != current) {
                current = i;
                zeta = draw_sign(seed, i, n, schedule.level(i));
                sp.excursion_signs.push_back({n, i, zeta});
            }
            sp.values[j] = static_cast<std::int8_t>(zeta);
        }
    }
    return sp;
}

Path to_cadlag_k(const SignPath& sp, const ExcursionDecomposition& dec, double t0, double dt)
{
    if (sp.values.size() != dec.size())
        throw ParameterError("sign path and decomposition differ in length");
    Path k{t0, dt, std::vector<double>(dec.size(), 0.0), "k"};
    for (const auto& e : dec.intervals) {
        k.values[e.g] = sp.values[e.first()];
        for (std::size_t j = e.first(); j < e.end(); ++j)
            k.values[j] = sp.values[j];
    }
    return k;
}

void write_csv(std::ostream& out, const SignPath& sp)
{
    out << "index,sign\n";
    for (std::size_t j = 0; j < sp.values.size(); ++j)
        out << j << ',' << static_cast<int>(sp.values[j]) << '\n';
}

void write_sign_table(std::ostream& out, const SignPath& sp)
{
    out << "n,i,zeta\n";
    for (const auto& s : sp.excursion_signs)
        out << s.n << ',' << s.i << ',' << s.zeta << '\n';
}

} // namespace sigma_skew
