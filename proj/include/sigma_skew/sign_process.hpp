#pragma once

#include "sigma_skew/excursions.hpp"
#include "sigma_skew/path.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sigma_skew {

/// Piecewise-constant skewness alpha(t) = alpha_i on [t_i, t_{i+1}), every
/// level in [0, 1]. A single level encodes a constant alpha.
class AlphaSchedule {
public:
    AlphaSchedule() : AlphaSchedule(StepFunction::constant(0.5)) {}
    explicit AlphaSchedule(StepFunction f);

    static AlphaSchedule constant(double alpha);
    /// "0:0.3,1:0.8"
    static AlphaSchedule parse(const std::string& text);

    double operator()(double t) const { return f_(t); }
    std::size_t interval_of(double t) const { return f_.interval_of(t); }
    double level(std::size_t i) const { return f_.levels()[i]; }
    std::size_t size() const noexcept { return f_.size(); }
    bool is_constant() const noexcept { return f_.is_constant(); }
    const StepFunction& function() const noexcept { return f_; }
    std::string to_string() const { return f_.to_string(); }

private:
    StepFunction f_;
};

/// The sign zeta^i_n drawn for excursion n on schedule interval i.
struct ExcursionSign {
    std::size_t n = 0;
    std::size_t i = 0;
    int zeta = 0;
};

/// Realisation of Z^alpha (or its inhomogeneous version) on a grid:
/// values[j] in {-1, 0, +1}, zero exactly on the zero mask.
struct SignPath {
    std::vector<std::int8_t> values;
    std::vector<ExcursionSign> excursion_signs;
    std::uint64_t seed = 0;
};

/// zeta^i_n as a pure function of (seed, i, n): +1 with probability alpha.
int draw_sign(std::uint64_t seed, std::size_t interval, std::size_t excursion, double alpha);

SignPath sample_z_alpha(const ExcursionDecomposition& dec, double alpha, std::uint64_t seed);

/// One independent sign per (schedule interval, excursion) cell; grid index j
/// takes the sign of the cell (interval of t0 + j dt, excursion holding j), so
/// the sign can switch inside an excursion at a breakpoint.
SignPath sample_z_alpha_schedule(const ExcursionDecomposition& dec, const AlphaSchedule& schedule, double t0,
                                 double dt, std::uint64_t seed);

/// Closed-left companion k: on [g_n, d_n) it carries the excursion's signs,
/// with k at g_n equal to the sign at the first interior index; zero elsewhere.
/// For a constant schedule k_{gamma_j} x_j = Z_j x_j at every grid index.
Path to_cadlag_k(const SignPath& sp, const ExcursionDecomposition& dec, double t0 = 0.0, double dt = 1.0);

/// `index,sign`
void write_csv(std::ostream& out, const SignPath& sp);
/// `n,i,zeta`
void write_sign_table(std::ostream& out, const SignPath& sp);

} // namespace sigma_skew
