#include "sigma_skew/ensemble.hpp"

#include "sigma_skew/errors.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <exception>
#include <mutex>
#include <thread>

namespace sigma_skew {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body)
{
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

Ensemble::Ensemble(std::size_t n_paths, std::size_t n_steps, double dt, std::size_t stride, double t0)
    : n_paths_(n_paths)
    , n_steps_(n_steps)
    , stride_(stride)
    , dt_(dt)
    , t0_(t0)
{
    if (n_paths == 0)
        throw ParameterError("ensemble needs at least one path");
    if (stride == 0 || n_steps % stride != 0)
        throw ParameterError("observation stride must divide the number of steps");
    if (!(dt > 0.0))
        throw ParameterError("dt must be positive");
    n_points_ = n_steps / stride + 1;
    values_.assign(n_paths_ * n_points_, 0.0);
    qv_.assign(n_paths_ * n_points_, 0.0);
}

void Ensemble::store(std::size_t replicate, const Path& full)
{
    if (replicate >= n_paths_)
        throw ParameterError("replicate index out of range");
    if (full.steps() != n_steps_ || full.dt != dt_)
        throw ParameterError("path does not match the ensemble grid");
    double* v = values_.data() + replicate * n_points_;
    double* q = qv_.data() + replicate * n_points_;
    double acc = 0.0;
    v[0] = full.values[0];
    q[0] = 0.0;
    for (std::size_t i = 1; i <= n_steps_; ++i) {
        const double d = full.values[i] - full.values[i - 1];
        acc += d * d;
        if (i % stride_ == 0) {
            v[i / stride_] = full.values[i];
            q[i / stride_] = acc;
        }
    }
}

std::size_t Ensemble::index_of(double t) const
{
    const double x = (t - t0_) / dt();
    const double r = std::round(x);
    if (r < 0.0 || r > static_cast<double>(n_points_ - 1) || std::abs(x - r) > 1e-9 * std::max(1.0, r))
        throw ParameterError("time is not an observation point of the ensemble");
    return static_cast<std::size_t>(r);
}

std::vector<double> Ensemble::column(std::size_t k) const
{
    std::vector<double> out(n_paths_);
    for (std::size_t p = 0; p < n_paths_; ++p)
        out[p] = value(p, k);
    return out;
}

void write_csv(std::ostream& out, const Ensemble& e)
{
    out << "replicate,t,value\n";
    char buf[80];
    for (std::size_t p = 0; p < e.n_paths(); ++p)
        for (std::size_t k = 0; k < e.n_points(); ++k) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p, e.time(k), e.value(p, k));
            out << buf;
        }
}

Ensemble collect_ensemble(std::size_t n_paths, std::size_t n_steps, double dt, std::size_t stride, unsigned threads,
                          const std::function<Path(std::uint64_t)>& make)
{
    Ensemble e(n_paths, n_steps, dt, stride);
    parallel_for(n_paths, threads, [&](std::size_t r) { e.store(r, make(r)); });
    return e;
}

} // namespace sigma_skew
