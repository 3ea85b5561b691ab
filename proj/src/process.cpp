#include "sigma_skew/process.hpp"

#include "sigma_skew/errors.hpp"
#include "sigma_skew/excursions.hpp"
#include "sigma_skew/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sigma_skew {

std::string to_string(ProcessKind kind)
{
    switch (kind) {
    case ProcessKind::abs_bm: return "abs_bm";
    case ProcessKind::drawdown: return "drawdown";
    case ProcessKind::scaled_abs: return "scaled_abs";
    case ProcessKind::product_abs: return "product_abs";
    case ProcessKind::custom: return "custom";
    }
    return "custom";
}

ProcessKind parse_process_kind(const std::string& text)
{
    std::string s = text;
    std::replace(s.begin(), s.end(), '-', '_');
    for (auto k : {ProcessKind::abs_bm, ProcessKind::drawdown, ProcessKind::scaled_abs,
                   ProcessKind::product_abs, ProcessKind::custom})
        if (s == to_string(k))
            return k;
    throw ParameterError("unknown process kind '" + text + "'");
}

void validate(const SigmaProcess& p)
{
    validate(p.x);
    validate(p.driver);
    validate(p.qv);
    require_aligned(p.x, p.driver, "x and driver");
    require_aligned(p.x, p.qv, "x and qv");
    if (p.x.values[0] != 0.0)
        throw ParameterError("class-(Sigma) process must start at 0");
    if (p.qv.values[0] != 0.0)
        throw ParameterError("qv must start at 0");
    for (std::size_t i = 1; i < p.qv.size(); ++i)
        if (p.qv.values[i] < p.qv.values[i - 1])
            throw ParameterError("qv must be nondecreasing");
}

Path generate_bm(std::size_t n_steps, double dt, std::uint64_t seed, std::uint64_t replicate)
{
    if (n_steps < 1)
        throw ParameterError("n_steps must be at least 1");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ParameterError("dt must be positive and finite");

    const CounterRng rng(seed);
    const double scale = std::sqrt(dt);
    Path b{0.0, dt, std::vector<double>(n_steps + 1), "bm"};
    double acc = 0.0;
    b.values[0] = 0.0;
    for (std::size_t j = 0; j < n_steps; j += 2) {
        const auto [z0, z1] = rng.normal_pair(j / 2, replicate);
        acc += scale * z0;
        b.values[j + 1] = acc;
        if (j + 1 < n_steps) {
            acc += scale * z1;
            b.values[j + 2] = acc;
        }
    }
    return b;
}

namespace {

inline double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

Path tanaka_driver(const Path& m)
{
    Path d{m.t0, m.dt, std::vector<double>(m.size(), 0.0), "driver"};
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < m.size(); ++j) {
        acc += sgn(m.values[j]) * (m.values[j + 1] - m.values[j]);
        d.values[j + 1] = acc;
    }
    return d;
}

} // namespace

SigmaProcess abs_of_martingale(const Path& m, ProcessKind kind, std::optional<Path> qv)
{
    validate(m);
    if (m.values[0] != 0.0)
        throw ParameterError("driving martingale must start at 0");
    // Zeros are placed on the magnitudes only. The driver integrates the raw
    // path: placing a zero looks one step ahead, so a driver built on the
    // snapped path would not be a martingale.
    const Path snapped = place_zeros(m);
    SigmaProcess p;
    p.kind = kind;
    p.x = Path{m.t0, m.dt, std::vector<double>(m.size()), "abs"};
    for (std::size_t i = 0; i < m.size(); ++i)
        p.x.values[i] = std::abs(snapped.values[i]);
    p.driver = tanaka_driver(m);
    p.qv = qv ? std::move(*qv) : realized_qv(p.driver);
    validate(p);
    return p;
}

SigmaProcess drawdown_of(const Path& b)
{
    validate(b);
    if (b.values[0] != 0.0)
        throw ParameterError("driving Brownian motion must start at 0");
    SigmaProcess p;
    p.kind = ProcessKind::drawdown;
    p.x = Path{b.t0, b.dt, std::vector<double>(b.size()), "drawdown"};
    p.driver = Path{b.t0, b.dt, std::vector<double>(b.size()), "driver"};
    double running_max = b.values[0];
    for (std::size_t i = 0; i < b.size(); ++i) {
        running_max = std::max(running_max, b.values[i]);
        p.x.values[i] = running_max - b.values[i];
        p.driver.values[i] = -b.values[i];
    }
    p.qv = realized_qv(p.driver);
    validate(p);
    return p;
}

SigmaProcess product_of(const Path& b1, const Path& b2)
{
    require_aligned(b1, b2, "product drivers");
    const SigmaProcess a = abs_of_martingale(b1, ProcessKind::abs_bm);
    const SigmaProcess c = abs_of_martingale(b2, ProcessKind::abs_bm);
    SigmaProcess p;
    p.kind = ProcessKind::product_abs;
    p.x = Path{b1.t0, b1.dt, std::vector<double>(b1.size()), "product"};
    p.driver = Path{b1.t0, b1.dt, std::vector<double>(b1.size(), 0.0), "driver"};
    double acc = 0.0;
    for (std::size_t i = 0; i < b1.size(); ++i) {
        p.x.values[i] = a.x.values[i] * c.x.values[i];
        if (i + 1 < b1.size()) {
            // Integrands use the raw magnitudes so the sum stays adapted.
            acc += std::abs(b1.values[i]) * (c.driver.values[i + 1] - c.driver.values[i])
                + std::abs(b2.values[i]) * (a.driver.values[i + 1] - a.driver.values[i]);
            p.driver.values[i + 1] = acc;
        }
    }
    p.qv = realized_qv(p.driver);
    validate(p);
    return p;
}

ScaledMartingale scale_martingale(const Path& b, const StepFunction& sigma)
{
    validate(b);
    for (double s : sigma.levels())
        if (!(s > 0.0))
            throw ParameterError("sigma must be positive");
    ScaledMartingale out{Path{b.t0, b.dt, std::vector<double>(b.size(), 0.0), "scaled"},
                         Path{b.t0, b.dt, std::vector<double>(b.size(), 0.0), "qv"}};
    double m = 0.0, q = 0.0;
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
        const double s = sigma(b.time(j));
        m += s * (b.values[j + 1] - b.values[j]);
        q += s * s * b.dt;
        out.m.values[j + 1] = m;
        out.qv.values[j + 1] = q;
    }
    return out;
}

SigmaProcess make_sigma_process(ProcessKind kind, std::size_t n_steps, double dt, std::uint64_t seed,
                                const SigmaParams& params)
{
    switch (kind) {
    case ProcessKind::abs_bm:
        return abs_of_martingale(generate_bm(n_steps, dt, seed, params.replicate), kind);
    case ProcessKind::drawdown:
        return drawdown_of(generate_bm(n_steps, dt, seed, params.replicate));
    case ProcessKind::scaled_abs: {
        auto sm = scale_martingale(generate_bm(n_steps, dt, seed, params.replicate), params.sigma);
        return abs_of_martingale(sm.m, kind, std::move(sm.qv));
    }
    case ProcessKind::product_abs: {
        if (!params.second_seed)
            throw ParameterError("product_abs needs a second driver seed");
        if (*params.second_seed == seed)
            throw ParameterError("product_abs drivers must use distinct seeds");
        return product_of(generate_bm(n_steps, dt, seed, params.replicate),
                          generate_bm(n_steps, dt, *params.second_seed, params.replicate));
    }
    case ProcessKind::custom:
        break;
    }
    throw ParameterError("custom processes are supplied by the caller, not generated");
}

std::vector<std::size_t> time_change_indices(const Path& qv, double horizon, double dt_new)
{
    validate(qv);
    if (!(dt_new > 0.0))
        throw ParameterError("new clock step must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw ParameterError("horizon must be nonnegative and finite");
    if (qv.back() < horizon)
        throw InsufficientQvError(qv.back(), horizon);

    const auto n_new = static_cast<std::size_t>(std::llround(horizon / dt_new));
    std::vector<std::size_t> idx(n_new + 1);
    const auto& q = qv.values;
    std::size_t i = 0;
    for (std::size_t k = 0; k <= n_new; ++k) {
        const double t = static_cast<double>(k) * dt_new;
        while (i < q.size() && q[i] < t)
            ++i;
        if (i == q.size())
            throw InsufficientQvError(qv.back(), t);
        idx[k] = i;
    }
    return idx;
}

SigmaProcess time_change(const SigmaProcess& p, double horizon)
{
    validate(p);
    const auto idx = time_change_indices(p.qv, horizon, p.x.dt);
    auto reindex = [&](const Path& src, const char* label) {
        Path out{0.0, src.dt, std::vector<double>(idx.size()), label};
        for (std::size_t k = 0; k < idx.size(); ++k)
            out.values[k] = src.values[idx[k]];
        return out;
    };
    SigmaProcess y;
    y.kind = p.kind;
    y.x = reindex(p.x, "time_changed");
    y.driver = reindex(p.driver, "driver");
    y.qv = reindex(p.qv, "qv");
    return y;
}

} // namespace sigma_skew
