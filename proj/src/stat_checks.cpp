#include "sigma_skew/stat_checks.hpp"

#include "sigma_skew/errors.hpp"
#include "sigma_skew/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

namespace sigma_skew {

namespace {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double chi2_sf(double w, int dof)
{
    if (!(w > 0.0))
        return 1.0;
    if (std::isinf(w))
        return 0.0;
    return dof == 1 ? std::erfc(std::sqrt(0.5 * w)) : std::exp(-0.5 * w);
}

/// Robust Wald statistic for E[d | x] = a + b x with a = b = 0.
struct WaldResult {
    double statistic = 0.0;
    int dof = 0;
};

WaldResult increment_wald(std::span<const double> x, std::span<const double> d)
{
    const auto n = static_cast<double>(x.size());
    CompensatedSum sx, sd;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx.add(x[i]);
        sd.add(d[i]);
    }
    const double mx = sx.value() / n, md = sd.value() / n;

    CompensatedSum sxx;
    for (double v : x)
        sxx.add((v - mx) * (v - mx));
    const double xx = sxx.value();

    if (!(xx > 0.0)) {
        CompensatedSum s2;
        for (double v : d)
            s2.add((v - md) * (v - md));
        const double var = s2.value() / n;
        if (md == 0.0)
            return {0.0, 1};
        if (!(var > 0.0))
            return {std::numeric_limits<double>::infinity(), 1};
        return {n * md * md / var, 1};
    }

    CompensatedSum sxd;
    for (std::size_t i = 0; i < x.size(); ++i)
        sxd.add((x[i] - mx) * d[i]);
    const double slope = sxd.value() / xx;

    // Centred design [1, x - mx]: the intercept estimate is md and the joint
    // hypothesis (intercept, slope) = 0 is unchanged by centring.
    CompensatedSum o11, o12, o22;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xc = x[i] - mx;
        const double e = d[i] - md - slope * xc;
        const double e2 = e * e;
        o11.add(e2);
        o12.add(e2 * xc);
        o22.add(e2 * xc * xc);
    }
    const double v11 = o11.value() / (n * n);
    const double v12 = o12.value() / (n * xx);
    const double v22 = o22.value() / (xx * xx);
    const double det = v11 * v22 - v12 * v12;
    if (md == 0.0 && slope == 0.0)
        return {0.0, 2};
    if (!(det > 0.0))
        return {std::numeric_limits<double>::infinity(), 2};
    const double w = (md * md * v22 - 2.0 * md * slope * v12 + slope * slope * v11) / det;
    return {w, 2};
}

} // namespace

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double ks_critical_value(double level)
{
    if (!(level > 0.0 && level < 1.0))
        throw ParameterError("significance level must lie in (0, 1)");
    return std::sqrt(-0.5 * std::log(0.5 * level));
}

double kolmogorov_pvalue(double lambda)
{
    if (lambda <= 0.0)
        return 1.0;
    if (lambda < 0.2)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? term : -term);
        if (term < 1e-17)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    if (sample.empty())
        throw ParameterError("KS distance of an empty sample");
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

double skew_bm_cdf(double y, double alpha, double t)
{
    if (!(t > 0.0))
        throw ParameterError("skew BM CDF needs t > 0");
    const double z = y / std::sqrt(t);
    if (y <= 0.0)
        return 2.0 * (1.0 - alpha) * normal_cdf(z);
    return (1.0 - alpha) + alpha * (2.0 * normal_cdf(z) - 1.0);
}

TestReport martingale_increment_test(const Ensemble& ensemble, std::size_t block, double level, std::string name)
{
    if (!(level > 0.0 && level < 1.0))
        throw ParameterError("significance level must lie in (0, 1)");
    if (ensemble.n_paths() < 2)
        throw ParameterError("degenerate ensemble: the increment regression needs at least two paths");
    if (block == 0 || (ensemble.n_points() - 1) % block != 0)
        throw ParameterError("block must divide the observation grid");

    const std::size_t n_blocks = (ensemble.n_points() - 1) / block;
    const std::size_t n = ensemble.n_paths();
    std::vector<double> x(n), d(n);
    double max_stat = 0.0, min_p = 1.0;
    std::size_t worst = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t k = b * block;
        for (std::size_t p = 0; p < n; ++p) {
            x[p] = ensemble.value(p, k);
            d[p] = ensemble.value(p, k + block) - x[p];
        }
        const auto wald = increment_wald(x, d);
        const double pv = chi2_sf(wald.statistic, wald.dof);
        if (pv < min_p) {
            min_p = pv;
            worst = b;
        }
        max_stat = std::max(max_stat, wald.statistic);
    }
    const double adjusted = std::min(1.0, min_p * static_cast<double>(n_blocks));

    // Linearity of the ensemble-mean realized QV, recorded for diagnostics.
    std::vector<double> t, q;
    for (std::size_t b = 0; b <= n_blocks; ++b) {
        const std::size_t k = b * block;
        CompensatedSum s;
        for (std::size_t p = 0; p < n; ++p)
            s.add(ensemble.qv(p, k));
        t.push_back(ensemble.time(k));
        q.push_back(s.value() / static_cast<double>(n));
    }
    double mt = 0.0, mq = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mt += t[i];
        mq += q[i];
    }
    mt /= static_cast<double>(t.size());
    mq /= static_cast<double>(t.size());
    double stt = 0.0, stq = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        stt += (t[i] - mt) * (t[i] - mt);
        stq += (t[i] - mt) * (q[i] - mq);
    }
    const double slope = stt > 0.0 ? stq / stt : 0.0;
    double max_dev = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        max_dev = std::max(max_dev, std::abs(q[i] - (mq + slope * (t[i] - mt))));
        scale = std::max(scale, std::abs(q[i]));
    }
    const double qv_dev = scale > 0.0 ? max_dev / scale : 0.0;

    TestReport r;
    r.name = std::move(name);
    r.statistic = max_stat;
    r.threshold = level;
    r.p_value = adjusted;
    r.pass = adjusted >= level;
    r.n_paths = n;
    r.n_steps = ensemble.n_steps();
    r.notes = "rule: p_value >= level; robust Wald on (1, Y_t), Bonferroni over " + std::to_string(n_blocks) +
              " blocks; weakest block " + std::to_string(worst) + "; mean-QV max relative deviation from linear fit " +
              format_double(qv_dev);
    return r;
}

TestReport sigma_membership_test(const SourceFactory& source, std::uint64_t seed, double level,
                                 const EnsembleOptions& options)
{
    const SigmaProcess first = source(0);
    const std::size_t steps = first.x.steps();
    if (options.blocks == 0 || steps % options.blocks != 0)
        throw ParameterError("blocks must divide the number of steps");
    const AlphaSchedule half = AlphaSchedule::constant(0.5);
    Ensemble e(options.n_paths, steps, first.x.dt, steps / options.blocks, first.x.t0);
    parallel_for(options.n_paths, options.threads, [&](std::size_t r) {
        const SigmaProcess src = r == 0 ? first : source(r);
        const auto sol = flip_excursions(src, half, derive_seed(seed, StreamTag::membership_sign, r), 0.0);
        e.store(r, sol.y);
    });
    auto report = martingale_increment_test(e, 1, level, "sigma_membership_" + to_string(first.kind));
    report.seed = seed;
    return report;
}

TestReport occupation_probability_test(const Ensemble& solutions, const AlphaSchedule& schedule,
                                       std::span<const double> times, double tol)
{
    if (times.empty())
        throw ParameterError("occupation test needs at least one time");
    constexpr std::size_t kMinNonzero = 30;
    double worst = 0.0;
    std::string detail;
    for (double t : times) {
        const std::size_t k = solutions.index_of(t);
        std::size_t positive = 0, nonzero = 0;
        for (std::size_t p = 0; p < solutions.n_paths(); ++p) {
            const double v = solutions.value(p, k);
            if (v != 0.0) {
                ++nonzero;
                if (v > 0.0)
                    ++positive;
            }
        }
        if (nonzero < kMinNonzero)
            throw ParameterError("too few nonzero samples at t = " + format_double(t));
        const double frac = static_cast<double>(positive) / static_cast<double>(nonzero);
        const double dev = std::abs(frac - schedule(t));
        worst = std::max(worst, dev);
        detail += (detail.empty() ? "" : "; ") + std::string("t=") + format_double(t) + " frac=" +
                  format_double(frac) + " alpha=" + format_double(schedule(t));
    }
    TestReport r;
    r.name = "occupation_probability";
    r.statistic = worst;
    r.threshold = tol;
    r.pass = worst <= tol;
    r.n_paths = solutions.n_paths();
    r.n_steps = solutions.n_steps();
    r.notes = "rule: statistic <= threshold; " + detail;
    return r;
}

TestReport skew_marginal_ks_test(const Ensemble& solutions, const AlphaSchedule& schedule, double t, double level)
{
    if (!schedule.is_constant())
        throw ParameterError("skew marginal KS test needs a constant alpha; use the occupation test");
    const double alpha = schedule.level(0);
    const std::size_t k = solutions.index_of(t);
    if (!(t > 0.0))
        throw ParameterError("KS time must be positive");
    const double d = ks_distance(solutions.column(k), [&](double y) { return skew_bm_cdf(y, alpha, t); });
    const double sqrt_n = std::sqrt(static_cast<double>(solutions.n_paths()));
    TestReport r;
    r.name = "skew_marginal_ks";
    r.statistic = d;
    r.threshold = ks_critical_value(level) / sqrt_n;
    r.p_value = kolmogorov_pvalue(sqrt_n * d);
    r.pass = d < r.threshold;
    r.n_paths = solutions.n_paths();
    r.n_steps = solutions.n_steps();
    r.notes = "rule: statistic < c(level)/sqrt(n); alpha=" + format_double(alpha) + " t=" + format_double(t);
    return r;
}

ResidualSample residual_sample(const SkewSolution& sol, const LocalTimeEstimate& lt)
{
    const Path drift = drift_ledger(sol, lt.lt);
    ResidualSample s;
    const auto& y = sol.y.values;
    s.w0 = y[0] - drift.values[0];
    double acc = 0.0, prev = s.w0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        const double w = y[i] - drift.values[i];
        acc += (w - prev) * (w - prev);
        prev = w;
    }
    s.qv_at_horizon = acc;
    s.w_at_horizon = prev;
    s.horizon = sol.y.horizon() - sol.y.t0;
    return s;
}

TestReport sde_residual_test(std::span<const ResidualSample> samples, double tol_qv, double level)
{
    if (samples.empty())
        throw ParameterError("residual test needs samples");
    const double horizon = samples.front().horizon;
    CompensatedSum qv;
    bool starts_at_zero = true;
    std::vector<double> terminal;
    terminal.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.horizon != horizon)
            throw ParameterError("misaligned grids: residual samples have different horizons");
        starts_at_zero = starts_at_zero && s.w0 == 0.0;
        qv.add(s.qv_at_horizon);
        terminal.push_back(s.w_at_horizon);
    }
    const auto n = static_cast<double>(samples.size());
    const double mean_qv = qv.value() / n;
    const double qv_dev = std::abs(mean_qv - horizon) / horizon;
    const double d = ks_distance(std::move(terminal), [&](double w) { return normal_cdf(w / std::sqrt(horizon)); });
    const double crit = ks_critical_value(level) / std::sqrt(n);

    TestReport r;
    r.name = "sde_residual";
    r.statistic = d;
    r.threshold = crit;
    r.p_value = kolmogorov_pvalue(std::sqrt(n) * d);
    r.pass = starts_at_zero && qv_dev <= tol_qv && d < crit;
    r.n_paths = samples.size();
    r.notes = "rule: W_0 = 0 and |mean qv(W)_T - T|/T <= " + format_double(tol_qv) +
              " and KS < c(level)/sqrt(n); W_0 zero=" + (starts_at_zero ? "yes" : "no") + " qv relative deviation=" +
              format_double(qv_dev) + " T=" + format_double(horizon);
    return r;
}

MultiplicativeDecomposition multiplicative_decomposition(const Path& x, const Path& lt)
{
    validate(x);
    require_aligned(x, lt, "x and local time");
    MultiplicativeDecomposition m{Path{x.t0, x.dt, std::vector<double>(x.size()), "C"},
                                  Path{x.t0, x.dt, std::vector<double>(x.size()), "W"},
                                  Path{x.t0, x.dt, std::vector<double>(x.size()), "I"}};
    double running_inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        m.c.values[i] = std::exp(lt.values[i]);
        m.w.values[i] = (1.0 + x.values[i]) * std::exp(-lt.values[i]);
        running_inf = std::min(running_inf, m.w.values[i]);
        m.i.values[i] = running_inf;
    }
    return m;
}

double azema_yor_sup_error(const Path& x, const Path& lt)
{
    const auto m = multiplicative_decomposition(x, lt);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::abs(m.w.values[i] / m.i.values[i] - 1.0 - x.values[i]));
    return worst;
}

TestReport azema_yor_identity_test(std::span<const double> sup_errors, double tol)
{
    if (sup_errors.empty())
        throw ParameterError("Azema-Yor test needs at least one path");
    std::vector<double> e(sup_errors.begin(), sup_errors.end());
    std::sort(e.begin(), e.end());
    const std::size_t n = e.size();
    const double median = n % 2 ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);
    TestReport r;
    r.name = "azema_yor_identity";
    r.statistic = median;
    r.threshold = tol;
    r.pass = median <= tol;
    r.n_paths = n;
    r.notes = "rule: statistic <= threshold; median over paths of sup_t |M/I - 1 - x|, max " + format_double(e.back());
    return r;
}

TabulatedFunction::TabulatedFunction(std::string name, double lo, double hi, std::vector<double> f,
                                     std::vector<double> antiderivative)
    : name_(std::move(name))
    , lo_(lo)
    , hi_(hi)
    , f_(std::move(f))
    , antiderivative_(std::move(antiderivative))
{
    if (!(hi > lo) || f_.size() < 2 || f_.size() != antiderivative_.size())
        throw ParameterError("malformed function table");
}

TabulatedFunction TabulatedFunction::exp_decay(double hi, std::size_t points)
{
    std::vector<double> f(points), big_f(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double x = hi * static_cast<double>(i) / static_cast<double>(points - 1);
        f[i] = std::exp(-x);
        big_f[i] = -std::expm1(-x);
    }
    return TabulatedFunction("exp", 0.0, hi, std::move(f), std::move(big_f));
}

TabulatedFunction TabulatedFunction::unit(double hi, std::size_t points)
{
    std::vector<double> f(points, 1.0), big_f(points);
    for (std::size_t i = 0; i < points; ++i)
        big_f[i] = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    return TabulatedFunction("one", 0.0, hi, std::move(f), std::move(big_f));
}

double TabulatedFunction::interpolate(const std::vector<double>& table, double x) const
{
    if (!covers(x))
        throw ParameterError("function table does not cover the observed local time range");
    const double pos = (x - lo_) / (hi_ - lo_) * static_cast<double>(table.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), table.size() - 2);
    const double w = pos - static_cast<double>(i);
    return w == 0.0 ? table[i] : table[i] + w * (table[i + 1] - table[i]);
}

double TabulatedFunction::f(double x) const
{
    return interpolate(f_, x);
}

double TabulatedFunction::antiderivative(double x) const
{
    return interpolate(antiderivative_, x);
}

Path transform_process(const Path& x, const Path& lt, const TabulatedFunction& f)
{
    validate(x);
    require_aligned(x, lt, "x and local time");
    Path out{x.t0, x.dt, std::vector<double>(x.size()), "transform_" + f.name()};
    for (std::size_t i = 0; i < x.size(); ++i)
        out.values[i] = f.f(lt.values[i]) * x.values[i] - f.antiderivative(lt.values[i]);
    return out;
}

Path balayage_process(const Path& x, const ExcursionDecomposition& dec, const StepFunction& k, const Path& lt)
{
    validate(x);
    require_aligned(x, lt, "x and local time");
    if (dec.size() != x.size())
        throw ParameterError("misaligned grids: decomposition and path");
    Path out{x.t0, x.dt, std::vector<double>(x.size()), "balayage"};
    CompensatedSum compensator;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0)
            compensator.add(k(x.time(i - 1)) * (lt.values[i] - lt.values[i - 1]));
        out.values[i] = k(x.time(dec.gamma[i])) * x.values[i] - compensator.value();
    }
    return out;
}

namespace {

TestReport compensated_martingale_test(const SourceFactory& source, std::string name, double level,
                                       const EnsembleOptions& options,
                                       const std::function<Path(const SigmaProcess&, const Path&)>& transform)
{
    const SigmaProcess first = source(0);
    const std::size_t steps = first.x.steps();
    if (options.blocks == 0 || steps % options.blocks != 0)
        throw ParameterError("blocks must divide the number of steps");
    Ensemble e(options.n_paths, steps, first.x.dt, steps / options.blocks, first.x.t0);
    parallel_for(options.n_paths, options.threads, [&](std::size_t r) {
        const SigmaProcess src = r == 0 ? first : source(r);
        const auto lt = lt_compensator(src);
        e.store(r, transform(src, lt.lt));
    });
    return martingale_increment_test(e, 1, level, std::move(name));
}

} // namespace

TestReport transform_martingale_test(const SourceFactory& source, const TabulatedFunction& f, std::uint64_t seed,
                                     double level, const EnsembleOptions& options)
{
    auto r = compensated_martingale_test(source, "transform_martingale_" + f.name(), level, options,
                                         [&](const SigmaProcess& src, const Path& lt) {
                                             return transform_process(src.x, lt, f);
                                         });
    r.seed = seed;
    return r;
}

TestReport balayage_identity_test(const SourceFactory& source, const StepFunction& k, std::uint64_t seed,
                                  double level, const EnsembleOptions& options)
{
    for (double v : k.levels())
        if (!std::isfinite(v))
            throw ParameterError("K must be bounded");
    auto r = compensated_martingale_test(source, "balayage_identity", level, options,
                                         [&](const SigmaProcess& src, const Path& lt) {
                                             return balayage_process(src.x, decompose(src.x, 0.0), k, lt);
                                         });
    r.seed = seed;
    return r;
}

TestReport abs_match_test(const SkewSolution& sol)
{
    return abs_match_summary(abs_mismatches(sol), 1, sol.y.steps(), sol.sign.seed);
}

TestReport abs_match_summary(std::size_t mismatches, std::size_t n_paths, std::size_t n_steps, std::uint64_t seed)
{
    TestReport r;
    r.name = "abs_match";
    r.statistic = static_cast<double>(mismatches);
    r.threshold = 0.0;
    r.pass = mismatches == 0;
    r.n_paths = n_paths;
    r.n_steps = n_steps;
    r.seed = seed;
    r.notes = "rule: statistic <= threshold; bitwise |y| == x at every grid point";
    return r;
}

namespace {

nlohmann::ordered_json report_json(const TestReport& r)
{
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["statistic"] = r.statistic;
    j["threshold"] = r.threshold;
    j["p_value"] = r.p_value ? nlohmann::ordered_json(*r.p_value) : nlohmann::ordered_json(nullptr);
    j["pass"] = r.pass;
    j["n_paths"] = r.n_paths;
    j["n_steps"] = r.n_steps;
    j["seed"] = r.seed;
    j["notes"] = r.notes;
    return j;
}

TestReport report_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw ParameterError("report entry is not a JSON object");
    TestReport r;
    try {
        r.name = j.at("name").get<std::string>();
        // Infinite statistics serialise as null.
        const auto& stat = j.at("statistic");
        r.statistic = stat.is_null() ? std::numeric_limits<double>::infinity() : stat.get<double>();
        r.threshold = j.at("threshold").get<double>();
        if (j.contains("p_value") && !j.at("p_value").is_null())
            r.p_value = j.at("p_value").get<double>();
        r.pass = j.at("pass").get<bool>();
        r.n_paths = j.value("n_paths", std::size_t{0});
        r.n_steps = j.value("n_steps", std::size_t{0});
        r.seed = j.value("seed", std::uint64_t{0});
        r.notes = j.value("notes", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed report: ") + e.what());
    }
    return r;
}

} // namespace

std::string to_json(const TestReport& r)
{
    return report_json(r).dump();
}

void write_reports_json(std::ostream& out, std::span<const TestReport> reports)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports)
        arr.push_back(report_json(r));
    out << arr.dump(2) << '\n';
}

std::vector<TestReport> read_reports_json(std::istream& in)
{
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed report file: ") + e.what());
    }
    std::vector<TestReport> out;
    if (j.is_array()) {
        for (const auto& item : j)
            out.push_back(report_from_json(item));
    } else {
        out.push_back(report_from_json(j));
    }
    return out;
}

void write_digest_csv(std::ostream& out, std::span<const TestReport> reports)
{
    out << "name,statistic,threshold,pass\n";
    char buf[96];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d\n", r.statistic, r.threshold, r.pass ? 1 : 0);
        out << r.name << buf;
    }
}

} // namespace sigma_skew
