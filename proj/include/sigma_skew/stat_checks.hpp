#pragma once

#include "sigma_skew/ensemble.hpp"
#include "sigma_skew/excursions.hpp"
#include "sigma_skew/local_time.hpp"
#include "sigma_skew/path.hpp"
#include "sigma_skew/process.hpp"
#include "sigma_skew/sign_process.hpp"
#include "sigma_skew/skew_solution.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sigma_skew {

/// Outcome of one verification. Distance-type tests pass when
/// statistic <= threshold; p-value tests pass when p_value >= threshold
/// (the significance level). `notes` records which rule applied.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    std::optional<double> p_value;
    bool pass = false;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::string notes;
};

// ---------------------------------------------------------------------------
// Distribution helpers

double normal_cdf(double x);
/// Asymptotic Kolmogorov critical value c(level), c(0.01) = 1.6276.
double ks_critical_value(double level);
/// P(sqrt(n) D > lambda) under the null, Kolmogorov limit law.
double kolmogorov_pvalue(double lambda);
/// Two-sided Kolmogorov-Smirnov distance between a sample and a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);
/// CDF of skew Brownian motion started at 0, at time t > 0.
double skew_bm_cdf(double y, double alpha, double t);

// ---------------------------------------------------------------------------
// Martingale characterisation

/// Cross-sectional increment regression: at each block boundary t regress
/// Y_{t+block} - Y_t on (1, Y_t) across paths and Wald-test both coefficients
/// jointly zero with heteroskedasticity-robust covariance. Boundaries where Y_t
/// is identical on every path use the intercept alone. Bonferroni across
/// boundaries. `block` counts observation points of the ensemble.
TestReport martingale_increment_test(const Ensemble& ensemble, std::size_t block, double level,
                                     std::string name = "martingale_increment");

using SourceFactory = std::function<SigmaProcess(std::uint64_t replicate)>;

struct EnsembleOptions {
    std::size_t n_paths = 1000;
    /// Number of martingale-test blocks; must divide the step count.
    std::size_t blocks = 8;
    unsigned threads = 1;
};

/// Flips each source path with alpha = 1/2 and runs the increment test.
TestReport sigma_membership_test(const SourceFactory& source, std::uint64_t seed, double level,
                                 const EnsembleOptions& options);

// ---------------------------------------------------------------------------
// Skew solution law

/// Max over `times` of |P(y_t > 0 | y_t != 0) - alpha(t)|.
TestReport occupation_probability_test(const Ensemble& solutions, const AlphaSchedule& schedule,
                                       std::span<const double> times, double tol);

/// KS distance of y_t against the skew Brownian motion CDF with constant alpha.
TestReport skew_marginal_ks_test(const Ensemble& solutions, const AlphaSchedule& schedule, double t, double level);

// ---------------------------------------------------------------------------
// SDE residual W = y - int (2 alpha - 1) dL

struct ResidualSample {
    double w0 = 0.0;
    double qv_at_horizon = 0.0;
    double w_at_horizon = 0.0;
    double horizon = 0.0;
};

ResidualSample residual_sample(const SkewSolution& sol, const LocalTimeEstimate& lt);

/// Checks W_0 = 0, |mean qv(W)_T - T| <= tol_qv * T and W_T ~ N(0, T) by KS.
TestReport sde_residual_test(std::span<const ResidualSample> samples, double tol_qv, double level);

// ---------------------------------------------------------------------------
// Decomposition identities for nonnegative class-(Sigma) processes

/// X = C W - 1 with C = exp(A), W = exp(-A) (X + 1), and I the running infimum of W.
struct MultiplicativeDecomposition {
    Path c;
    Path w;
    Path i;
};

MultiplicativeDecomposition multiplicative_decomposition(const Path& x, const Path& lt);

/// sup_t |(M_t / I_t - 1) - x_t| with M_t = (1 + x_t) exp(-L_t).
double azema_yor_sup_error(const Path& x, const Path& lt);

/// Median of per-path sup errors against tol.
TestReport azema_yor_identity_test(std::span<const double> sup_errors, double tol);

/// f tabulated on a uniform grid together with its antiderivative F, F(lo) = 0
/// when lo = 0. Evaluated by linear interpolation.
class TabulatedFunction {
public:
    TabulatedFunction(std::string name, double lo, double hi, std::vector<double> f, std::vector<double> antiderivative);

    /// f(x) = exp(-x), F(x) = 1 - exp(-x) on [0, hi].
    static TabulatedFunction exp_decay(double hi = 64.0, std::size_t points = 8193);
    /// f = 1, F(x) = x on [0, hi].
    static TabulatedFunction unit(double hi = 64.0, std::size_t points = 8193);

    double f(double x) const;
    double antiderivative(double x) const;
    bool covers(double x) const noexcept { return x >= lo_ && x <= hi_; }
    const std::string& name() const noexcept { return name_; }

private:
    double interpolate(const std::vector<double>& table, double x) const;

    std::string name_;
    double lo_, hi_;
    std::vector<double> f_, antiderivative_;
};

/// f(L_t) x_t - F(L_t). Throws ParameterError when L leaves the table.
Path transform_process(const Path& x, const Path& lt, const TabulatedFunction& f);

/// K(t_{gamma_i}) x_i - sum_{j<i} K(t_j) (L_{j+1} - L_j).
Path balayage_process(const Path& x, const ExcursionDecomposition& dec, const StepFunction& k, const Path& lt);

/// The increment test on f(A) X - F(A) with A the compensator of each source path.
TestReport transform_martingale_test(const SourceFactory& source, const TabulatedFunction& f, std::uint64_t seed,
                                     double level, const EnsembleOptions& options);

/// The increment test on K_gamma X - int K dA.
TestReport balayage_identity_test(const SourceFactory& source, const StepFunction& k, std::uint64_t seed,
                                  double level, const EnsembleOptions& options);

// ---------------------------------------------------------------------------
// Pathwise identity |y| = x

TestReport abs_match_test(const SkewSolution& sol);
/// Aggregate over an ensemble: total mismatch count must be 0.
TestReport abs_match_summary(std::size_t mismatches, std::size_t n_paths, std::size_t n_steps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Serialisation

/// JSON object with the TestReport fields.
std::string to_json(const TestReport& r);
/// JSON array of reports, pretty-printed with a trailing newline.
void write_reports_json(std::ostream& out, std::span<const TestReport> reports);
/// Parses a single report object or an array of them; throws ParameterError
/// on malformed input.
std::vector<TestReport> read_reports_json(std::istream& in);
/// `name,statistic,threshold,pass`
void write_digest_csv(std::ostream& out, std::span<const TestReport> reports);

} // namespace sigma_skew
