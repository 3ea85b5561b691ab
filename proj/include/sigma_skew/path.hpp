#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sigma_skew {

/// A sampled trajectory on the uniform grid t0 + i * dt, i = 0..N.
/// The grid is implicit; only the values are stored.
struct Path {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;
    std::string label;

    std::size_t size() const noexcept { return values.size(); }
    std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    double time(std::size_t i) const noexcept { return t0 + static_cast<double>(i) * dt; }
    double horizon() const noexcept { return time(steps()); }
    double back() const { return values.back(); }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Throws ParameterError unless dt > 0 is finite, the path is nonempty and
/// every value is finite.
void validate(const Path& p);

/// Throws ParameterError unless the two paths share t0, dt and length.
void require_aligned(const Path& a, const Path& b, const char* what);

Path make_path(double t0, double dt, std::vector<double> values, std::string label = {});

/// Cumulative sum of squared increments, zero at index 0.
Path realized_qv(const Path& p);

/// Index of the grid point at time t; throws unless t is within a relative
/// 1e-9 of a grid time inside the path.
std::size_t grid_index(const Path& p, double t);

/// `t,value` CSV, 17 significant digits.
void write_csv(std::ostream& out, const Path& p);

/// A right-continuous step function of time:
/// f(t) = levels[i] for t in [breakpoints[i], breakpoints[i+1]).
/// The first breakpoint is 0 and the last level extends to infinity.
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> breakpoints, std::vector<double> levels);

    static StepFunction constant(double level);

    /// Parses "t0:v0,t1:v1,..." (comma separated time:value pairs).
    static StepFunction parse(const std::string& text);

    double operator()(double t) const { return levels_[interval_of(t)]; }
    std::size_t interval_of(double t) const;
    std::size_t size() const noexcept { return levels_.size(); }
    bool is_constant() const noexcept { return levels_.size() == 1; }

    std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    std::span<const double> levels() const noexcept { return levels_; }

    std::string to_string() const;

private:
    std::vector<double> breakpoints_{0.0};
    std::vector<double> levels_{0.0};
};

/// Neumaier compensated accumulator. Sums over large ensembles go through here
/// so aggregation error does not grow with the number of terms.
class CompensatedSum {
public:
    void add(double v) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

} // namespace sigma_skew
