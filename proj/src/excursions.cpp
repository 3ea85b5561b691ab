#include "sigma_skew/excursions.hpp"

#include "sigma_skew/errors.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sigma_skew {

ExcursionDecomposition decompose(const Path& x, double zero_tol)
{
    validate(x);
    if (!(zero_tol >= 0.0) || !std::isfinite(zero_tol))
        throw ParameterError("zero_tol must be a nonnegative finite number");
    if (std::abs(x.values[0]) > zero_tol)
        throw ParameterError("path does not vanish at 0");

    const std::size_t n = x.size();
    ExcursionDecomposition dec;
    dec.zero_mask.resize(n);
    dec.gamma.resize(n);

    std::size_t last = 0;
    bool open = false;
    for (std::size_t i = 0; i < n; ++i) {
        const bool zero = std::abs(x.values[i]) <= zero_tol;
        dec.zero_mask[i] = zero;
        if (zero) {
            if (open) {
                dec.intervals.back().d = i;
                open = false;
            }
            last = i;
        } else if (!open) {
            dec.intervals.push_back({last, 0, false});
            open = true;
        }
        dec.gamma[i] = last;
    }
    if (open) {
        dec.intervals.back().d = n - 1;
        dec.intervals.back().unfinished = true;
    }
    return dec;
}

std::size_t last_zero(const ExcursionDecomposition& dec, std::size_t i)
{
    if (i >= dec.gamma.size())
        throw std::out_of_range("grid index out of range");
    return dec.gamma[i];
}

Path place_zeros(const Path& signed_path)
{
    validate(signed_path);
    Path out = signed_path;
    auto& v = out.values;
    const auto& raw = signed_path.values;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] == 0.0 || raw[i + 1] == 0.0)
            continue;
        if ((v[i] > 0.0) != (raw[i + 1] > 0.0)) {
            if (std::abs(raw[i]) <= std::abs(raw[i + 1]))
                v[i] = 0.0;
            else
                v[i + 1] = 0.0;
        }
    }
    // Normalise -0.0 so magnitudes compare bitwise.
    for (double& e : v)
        if (e == 0.0)
            e = 0.0;
    return out;
}

void write_csv(std::ostream& out, const ExcursionDecomposition& dec)
{
    out << "n,g_index,d_index,unfinished\n";
    for (std::size_t n = 0; n < dec.intervals.size(); ++n) {
        const auto& e = dec.intervals[n];
        out << n << ',' << e.g << ',' << e.d << ',' << (e.unfinished ? 1 : 0) << '\n';
    }
}

} // namespace sigma_skew
