#include "sigma_skew/path.hpp"

#include "sigma_skew/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace sigma_skew {

InsufficientQvError::InsufficientQvError(double attained, double requested)
    : std::runtime_error([&] {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "insufficient quadratic variation: attained qv %.17g < requested horizon %.17g",
                      attained, requested);
        return std::string(buf);
    }())
    , attained_(attained)
    , requested_(requested)
{
}

void validate(const Path& p)
{
    if (!(p.dt > 0.0) || !std::isfinite(p.dt))
        throw ParameterError("path dt must be positive and finite");
    if (!std::isfinite(p.t0))
        throw ParameterError("path t0 must be finite");
    if (p.values.empty())
        throw ParameterError("path has no samples");
    for (double v : p.values)
        if (!std::isfinite(v))
            throw ParameterError("path contains a non-finite value");
}

void require_aligned(const Path& a, const Path& b, const char* what)
{
    if (a.t0 != b.t0 || a.dt != b.dt || a.size() != b.size())
        throw ParameterError(std::string("misaligned grids: ") + what);
}

Path make_path(double t0, double dt, std::vector<double> values, std::string label)
{
    Path p{t0, dt, std::move(values), std::move(label)};
    validate(p);
    return p;
}

Path realized_qv(const Path& p)
{
    validate(p);
    Path qv{p.t0, p.dt, std::vector<double>(p.size(), 0.0), "qv(" + p.label + ")"};
    double acc = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double d = p.values[i] - p.values[i - 1];
        acc += d * d;
        qv.values[i] = acc;
    }
    return qv;
}

std::size_t grid_index(const Path& p, double t)
{
    const double x = (t - p.t0) / p.dt;
    const double r = std::round(x);
    if (r < 0.0 || r > static_cast<double>(p.steps()) || std::abs(x - r) > 1e-9 * std::max(1.0, r))
        throw ParameterError("time is not a grid point of the path");
    return static_cast<std::size_t>(r);
}

void write_csv(std::ostream& out, const Path& p)
{
    out << "t,value\n";
    char buf[64];
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.time(i), p.values[i]);
        out << buf;
    }
}

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> levels)
    : breakpoints_(std::move(breakpoints))
    , levels_(std::move(levels))
{
    if (breakpoints_.empty() || breakpoints_.size() != levels_.size())
        throw ParameterError("step function needs one level per breakpoint");
    if (breakpoints_.front() != 0.0)
        throw ParameterError("step function must start at time 0");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
        if (!(breakpoints_[i] > breakpoints_[i - 1]) || !std::isfinite(breakpoints_[i]))
            throw ParameterError("step function breakpoints must be strictly increasing");
    for (double v : levels_)
        if (!std::isfinite(v))
            throw ParameterError("step function level is not finite");
}

StepFunction StepFunction::constant(double level)
{
    return StepFunction({0.0}, {level});
}

StepFunction StepFunction::parse(const std::string& text)
{
    std::vector<double> times, values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ParameterError("expected time:value pair, got '" + item + "'");
        try {
            std::size_t used = 0;
            const std::string ts = item.substr(0, colon), vs = item.substr(colon + 1);
            times.push_back(std::stod(ts, &used));
            if (used != ts.size())
                throw ParameterError("trailing characters in '" + item + "'");
            values.push_back(std::stod(vs, &used));
            if (used != vs.size())
                throw ParameterError("trailing characters in '" + item + "'");
        } catch (const std::logic_error&) {
            throw ParameterError("malformed time:value pair '" + item + "'");
        }
    }
    if (times.empty())
        throw ParameterError("empty step function");
    return StepFunction(std::move(times), std::move(values));
}

std::size_t StepFunction::interval_of(double t) const
{
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

std::string StepFunction::to_string() const
{
    std::string out;
    char buf[80];
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", i ? "," : "", breakpoints_[i], levels_[i]);
        out += buf;
    }
    return out;
}

void CompensatedSum::add(double v) noexcept
{
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
        compensation_ += (sum_ - t) + v;
    else
        compensation_ += (v - t) + sum_;
    sum_ = t;
}

} // namespace sigma_skew
