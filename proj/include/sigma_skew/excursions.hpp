#pragma once

#include "sigma_skew/path.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sigma_skew {

/// One excursion away from zero. g and d are grid indices of the delimiting
/// zeros; an unfinished excursion runs to the last grid index (d = N) without
/// a closing zero.
struct Excursion {
    std::size_t g = 0;
    std::size_t d = 0;
    bool unfinished = false;

    std::size_t first() const noexcept { return g + 1; }
    /// One past the last nonzero index.
    std::size_t end() const noexcept { return unfinished ? d + 1 : d; }
};

struct ExcursionDecomposition {
    std::vector<Excursion> intervals;
    std::vector<std::uint8_t> zero_mask;
    /// gamma[i]: last zero index at or before i.
    std::vector<std::size_t> gamma;

    std::size_t size() const noexcept { return zero_mask.size(); }
};

/// Splits x into maximal nonzero runs. A sample counts as zero when
/// |x_i| <= zero_tol. Throws ParameterError("path does not vanish at 0") when
/// the first sample is not zero.
ExcursionDecomposition decompose(const Path& x, double zero_tol);

/// Last zero at or before grid index i; throws std::out_of_range.
std::size_t last_zero(const ExcursionDecomposition& dec, std::size_t i);

/// Discrete surrogate of the zero set of a continuous signed path: wherever
/// the sign strictly changes between i and i+1 the sample with the smaller
/// magnitude (left on ties) is set to exactly 0. Samples already 0 stay 0.
Path place_zeros(const Path& signed_path);

/// `n,g_index,d_index,unfinished`
void write_csv(std::ostream& out, const ExcursionDecomposition& dec);

} // namespace sigma_skew
