#include "sigma_skew/local_time.hpp"

#include "sigma_skew/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace sigma_skew {

std::string to_string(LocalTimeMethod m)
{
    return m == LocalTimeMethod::band ? "band" : "tanaka";
}

LocalTimeEstimate lt_band(const Path& x, const Path& qv, double eps)
{
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw ParameterError("band half-width eps must be positive");
    validate(x);
    validate(qv);
    require_aligned(x, qv, "x and qv");

    LocalTimeEstimate est;
    est.method = LocalTimeMethod::band;
    est.eps = eps;
    est.lt = Path{x.t0, x.dt, std::vector<double>(x.size(), 0.0), "lt_band"};
    const double scale = 1.0 / (2.0 * eps);
    double occupation = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        if (std::abs(x.values[j]) <= eps)
            occupation += std::max(0.0, qv.values[j + 1] - qv.values[j]);
        est.lt.values[j + 1] = occupation * scale;
    }
    return est;
}

double default_band_eps(const Path& qv)
{
    // Typical clock increment per step that actually moves. Time-changed
    // paths repeat samples, so the nominal dt understates it.
    std::size_t moving = 0;
    for (std::size_t j = 1; j < qv.size(); ++j)
        if (qv.values[j] > qv.values[j - 1])
            ++moving;
    if (moving == 0)
        return std::sqrt(qv.dt);
    return std::sqrt(qv.back() / static_cast<double>(moving));
}

LocalTimeEstimate lt_tanaka(const Path& x)
{
    validate(x);
    LocalTimeEstimate est;
    est.method = LocalTimeMethod::tanaka;
    est.raw = Path{x.t0, x.dt, std::vector<double>(x.size(), 0.0), "tanaka_raw"};
    est.lt = Path{x.t0, x.dt, std::vector<double>(x.size(), 0.0), "lt_tanaka"};
    const double origin = std::abs(x.values[0]);
    double stochastic_integral = 0.0, running_max = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        const double s = x.values[j] < 0.0 ? -1.0 : 1.0;
        stochastic_integral += s * (x.values[j + 1] - x.values[j]);
        const double raw = std::abs(x.values[j + 1]) - origin - stochastic_integral;
        running_max = std::max(running_max, raw);
        est.raw->values[j + 1] = raw;
        est.lt.values[j + 1] = running_max;
    }
    return est;
}

LocalTimeEstimate lt_compensator(const SigmaProcess& p)
{
    validate(p);
    LocalTimeEstimate est;
    est.method = LocalTimeMethod::tanaka;
    est.raw = Path{p.x.t0, p.x.dt, std::vector<double>(p.x.size(), 0.0), "compensator_raw"};
    est.lt = Path{p.x.t0, p.x.dt, std::vector<double>(p.x.size(), 0.0), "compensator"};
    double running_max = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        const double a = p.x.values[i] - p.driver.values[i];
        running_max = std::max(running_max, a);
        est.raw->values[i] = a;
        est.lt.values[i] = running_max;
    }
    return est;
}

void write_csv(std::ostream& out, const LocalTimeEstimate& est)
{
    out << "t,lt,method,eps\n";
    const std::string method = to_string(est.method);
    char buf[96];
    for (std::size_t i = 0; i < est.lt.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g\n", est.lt.time(i), est.lt.values[i], method.c_str(),
                      est.eps);
        out << buf;
    }
}

} // namespace sigma_skew
