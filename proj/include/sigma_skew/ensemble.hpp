#pragma once

#include "sigma_skew/path.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace sigma_skew {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome never depends on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Many replicates of one process observed every `stride` grid steps.
/// Alongside the values it keeps the realized quadratic variation of each
/// full-resolution path at the same observation points.
class Ensemble {
public:
    Ensemble() = default;
    Ensemble(std::size_t n_paths, std::size_t n_steps, double dt, std::size_t stride, double t0 = 0.0);

    /// Thread-safe for distinct replicates.
    void store(std::size_t replicate, const Path& full);

    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t n_points() const noexcept { return n_points_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t stride() const noexcept { return stride_; }
    /// Spacing between observation points.
    double dt() const noexcept { return dt_ * static_cast<double>(stride_); }
    double t0() const noexcept { return t0_; }
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt(); }
    /// Observation index of time t; throws ParameterError off the grid.
    std::size_t index_of(double t) const;

    double value(std::size_t path, std::size_t k) const { return values_[path * n_points_ + k]; }
    double qv(std::size_t path, std::size_t k) const { return qv_[path * n_points_ + k]; }
    std::span<const double> row(std::size_t path) const
    {
        return {values_.data() + path * n_points_, n_points_};
    }
    /// All paths at observation index k.
    std::vector<double> column(std::size_t k) const;

private:
    std::size_t n_paths_ = 0;
    std::size_t n_points_ = 0;
    std::size_t n_steps_ = 0;
    std::size_t stride_ = 1;
    double dt_ = 1.0;
    double t0_ = 0.0;
    std::vector<double> values_;
    std::vector<double> qv_;
};

/// `replicate,t,value`, one row per stored observation.
void write_csv(std::ostream& out, const Ensemble& e);

/// Fills an ensemble with make(replicate) for every replicate.
Ensemble collect_ensemble(std::size_t n_paths, std::size_t n_steps, double dt, std::size_t stride, unsigned threads,
                          const std::function<Path(std::uint64_t)>& make);

} // namespace sigma_skew
