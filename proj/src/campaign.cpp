#include "sigma_skew/campaign.hpp"

#include "sigma_skew/errors.hpp"
#include "sigma_skew/local_time.hpp"
#include "sigma_skew/rng.hpp"
#include "sigma_skew/skew_solution.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sigma_skew {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::size_t kMartingaleBlocks = 8;
constexpr std::size_t kMaxObservationIntervals = 64;
constexpr double kDefaultQvTolerance = 0.02;
constexpr double kDefaultAzemaYorTolerance = 0.05;
constexpr double kDefaultLocalTimeTolerance = 0.05;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool wants(const CampaignConfig& c, const std::string& name)
{
    return std::any_of(c.tests.begin(), c.tests.end(), [&](const TestSpec& t) { return t.name == name; });
}

std::size_t grid_steps(const CampaignConfig& c)
{
    return static_cast<std::size_t>(std::llround(effective_horizon(c) / c.dt));
}

/// Steps of the generated source path (before any time change).
std::size_t source_steps(const CampaignConfig& c)
{
    return construction_for(c.process) == Construction::direct ? grid_steps(c) : c.n_steps;
}

std::size_t observation_stride(const CampaignConfig& c, std::size_t steps)
{
    if (c.stride != 0) {
        if (steps % c.stride != 0)
            throw ParameterError("stride must divide the number of grid steps (" + std::to_string(steps) + ")");
        return c.stride;
    }
    for (std::size_t s = 1; s <= steps; ++s)
        if (steps % s == 0 && steps / s <= kMaxObservationIntervals)
            return s;
    return steps;
}

SourceFactory source_factory(const CampaignConfig& c)
{
    const std::uint64_t driver_seed = derive_seed(c.seed, StreamTag::driver, 0);
    const std::uint64_t second_seed = derive_seed(c.seed, StreamTag::second_driver, 0);
    const std::size_t steps = source_steps(c);
    return [=, kind = c.process, dt = c.dt, sigma = c.sigma](std::uint64_t r) {
        SigmaParams p;
        p.sigma = sigma;
        p.second_seed = second_seed;
        p.replicate = r;
        return make_sigma_process(kind, steps, dt, driver_seed, p);
    };
}

SkewSolution solve(const CampaignConfig& c, const SigmaProcess& src, std::uint64_t r)
{
    const std::uint64_t sign_seed = derive_seed(c.seed, StreamTag::sign, r);
    if (construction_for(c.process) == Construction::direct)
        return build_direct(src, c.schedule, sign_seed);
    return build_time_changed(src, c.schedule, sign_seed, effective_horizon(c));
}

/// Observation times for the occupation test: the horizon for a constant
/// alpha, otherwise the midpoint of every schedule interval inside the horizon.
std::vector<double> occupation_times(const CampaignConfig& c, const Ensemble& e)
{
    const double h = effective_horizon(c);
    std::vector<double> mids;
    if (c.schedule.is_constant()) {
        mids.push_back(h);
    } else {
        const auto b = c.schedule.function().breakpoints();
        for (std::size_t i = 0; i < b.size() && b[i] < h; ++i) {
            const double hi = i + 1 < b.size() ? std::min(b[i + 1], h) : h;
            mids.push_back(0.5 * (b[i] + hi));
        }
    }
    std::vector<double> times;
    for (double m : mids) {
        auto k = static_cast<std::size_t>(std::llround((m - e.t0()) / e.dt()));
        k = std::clamp<std::size_t>(k, 1, e.n_points() - 1);
        const double t = e.time(k);
        if (times.empty() || times.back() != t)
            times.push_back(t);
    }
    return times;
}

std::size_t martingale_block(const Ensemble& e)
{
    const std::size_t intervals = e.n_points() - 1;
    return intervals % kMartingaleBlocks == 0 ? intervals / kMartingaleBlocks : 1;
}

void stamp(TestReport& r, const std::string& name, const CampaignConfig& c, std::size_t steps)
{
    r.name = name;
    r.n_paths = c.n_paths;
    r.n_steps = steps;
    r.seed = c.seed;
}

} // namespace

const std::vector<std::string>& known_tests()
{
    static const std::vector<std::string> names{
        "occupation",  "ks",         "martingale",    "martingale-source", "sde-residual",    "abs-match",
        "azema-yor",   "transform-one", "transform-exp", "balayage",       "sigma-membership", "local-time"};
    return names;
}

std::vector<TestSpec> parse_test_list(const std::string& text)
{
    std::vector<TestSpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        TestSpec t;
        const auto eq = item.find('=');
        t.name = item.substr(0, eq);
        if (std::find(known_tests().begin(), known_tests().end(), t.name) == known_tests().end())
            throw ParameterError("unknown test '" + t.name + "'");
        if (eq != std::string::npos) {
            const std::string v = item.substr(eq + 1);
            std::size_t used = 0;
            double tol = 0.0;
            try {
                tol = std::stod(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != v.size() || !(tol >= 0.0) || !std::isfinite(tol))
                throw ParameterError("bad tolerance for test '" + t.name + "'");
            t.tolerance = tol;
        }
        out.push_back(std::move(t));
    }
    if (out.empty())
        throw ParameterError("tests: empty test list");
    return out;
}

Construction construction_for(ProcessKind kind)
{
    return kind == ProcessKind::abs_bm || kind == ProcessKind::drawdown ? Construction::direct
                                                                        : Construction::time_changed;
}

double effective_horizon(const CampaignConfig& c)
{
    return c.horizon.value_or(static_cast<double>(c.n_steps) * c.dt);
}

void validate(const CampaignConfig& c)
{
    if (c.process == ProcessKind::custom)
        throw ParameterError("process: custom processes cannot be simulated from the command line");
    if (c.n_paths < 1)
        throw ParameterError("paths: need at least one path");
    if (c.n_steps < 1)
        throw ParameterError("steps: need at least one step");
    if (!(c.dt > 0.0) || !std::isfinite(c.dt))
        throw ParameterError("dt: must be positive and finite");
    const double h = effective_horizon(c);
    if (!(h > 0.0) || h > static_cast<double>(c.n_steps) * c.dt * (1.0 + 1e-12))
        throw ParameterError("horizon: must be positive and at most steps * dt");
    const double ratio = h / c.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ParameterError("horizon: must be a multiple of dt");
    if (c.eps && !(*c.eps > 0.0))
        throw ParameterError("eps: must be positive");
    if (!(c.level > 0.0 && c.level < 1.0))
        throw ParameterError("level: must lie in (0, 1)");
    if (c.threads < 1)
        throw ParameterError("threads: must be at least 1");
    for (double s : c.sigma.levels())
        if (!(s > 0.0) || !std::isfinite(s))
            throw ParameterError("sigma: levels must be positive");
    for (const auto& name : c.expect_fail)
        if (!wants(c, name))
            throw ParameterError("expect-fail: '" + name + "' is not among the tests run");
    observation_stride(c, grid_steps(c));
}

std::vector<TestSpec> default_tests(const CampaignConfig& c)
{
    std::vector<TestSpec> t{{"occupation", {}}};
    if (c.schedule.is_constant())
        t.push_back({"ks", {}});
    for (const char* n : {"sde-residual", "abs-match", "azema-yor", "transform-one", "transform-exp",
                          "sigma-membership", "local-time"})
        t.push_back({n, {}});
    return t;
}

std::string manifest_json(const CampaignConfig& c)
{
    ojson j;
    j["library_version"] = kLibraryVersion;
    j["process"] = to_string(c.process);
    j["construction"] = to_string(construction_for(c.process));
    j["alpha_schedule"] = c.schedule.to_string();
    j["sigma"] = c.sigma.to_string();
    j["paths"] = c.n_paths;
    j["steps"] = c.n_steps;
    j["dt"] = c.dt;
    j["horizon"] = effective_horizon(c);
    j["seed"] = c.seed;
    j["eps"] = c.eps ? ojson(*c.eps) : ojson(nullptr);
    j["stride"] = observation_stride(c, grid_steps(c));
    j["level"] = c.level;
    ojson tests = ojson::array();
    for (const auto& t : c.tests) {
        ojson e;
        e["name"] = t.name;
        e["tolerance"] = t.tolerance ? ojson(*t.tolerance) : ojson(nullptr);
        tests.push_back(e);
    }
    j["tests"] = tests;
    j["expect_fail"] = c.expect_fail;
    j["format"] = c.format == OutputFormat::json ? "json" : "csv";
    j["seed_derivation"] = {
        {"rng", "philox4x32-10, counter = (draw index, replicate), key = derived seed"},
        {"driver", "derive_seed(seed, 1, 0); replicate r reads stream r"},
        {"second_driver", "derive_seed(seed, 2, 0); replicate r reads stream r"},
        {"sign", "derive_seed(seed, 3, r); excursion n in schedule interval i reads index n, stream i"},
        {"membership_sign", "derive_seed(seed, 4, r)"},
        {"derive_seed", "splitmix64 finalizer chain over (seed, tag, replicate)"}};
    return j.dump(2) + "\n";
}

CampaignConfig config_from_manifest(const std::string& text)
{
    CampaignConfig c;
    try {
        const auto j = nlohmann::json::parse(text);
        c.process = parse_process_kind(j.at("process").get<std::string>());
        c.schedule = AlphaSchedule::parse(j.at("alpha_schedule").get<std::string>());
        c.sigma = StepFunction::parse(j.at("sigma").get<std::string>());
        c.n_paths = j.at("paths").get<std::size_t>();
        c.n_steps = j.at("steps").get<std::size_t>();
        c.dt = j.at("dt").get<double>();
        c.horizon = j.at("horizon").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("eps").is_null())
            c.eps = j.at("eps").get<double>();
        c.stride = j.at("stride").get<std::size_t>();
        c.level = j.at("level").get<double>();
        for (const auto& t : j.at("tests")) {
            TestSpec s;
            s.name = t.at("name").get<std::string>();
            if (!t.at("tolerance").is_null())
                s.tolerance = t.at("tolerance").get<double>();
            c.tests.push_back(s);
        }
        c.expect_fail = j.at("expect_fail").get<std::vector<std::string>>();
        c.format = j.at("format").get<std::string>() == "json" ? OutputFormat::json : OutputFormat::csv;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed manifest: ") + e.what());
    }
    return c;
}

CampaignResult run_campaign(const CampaignConfig& cfg, bool verify)
{
    CampaignConfig c = cfg;
    if (c.tests.empty())
        c.tests = default_tests(c);
    validate(c);

    const std::size_t steps = grid_steps(c);
    const std::size_t stride = observation_stride(c, steps);
    const SourceFactory source = source_factory(c);

    const bool need_source_ens = verify && wants(c, "martingale-source");
    const bool need_azema = verify && wants(c, "azema-yor");
    const bool need_residual = verify && wants(c, "sde-residual");
    const bool need_lt = verify && wants(c, "local-time");
    const bool need_match = verify && wants(c, "abs-match");

    CampaignResult res;
    res.solutions = Ensemble(c.n_paths, steps, c.dt, stride);
    Ensemble source_ens;
    if (need_source_ens)
        source_ens = Ensemble(c.n_paths, steps, c.dt, stride);
    std::vector<std::size_t> mismatches(c.n_paths, 0);
    std::vector<double> azema(need_azema ? c.n_paths : 0);
    std::vector<ResidualSample> residuals(need_residual ? c.n_paths : 0);
    std::vector<double> lt_band_end(need_lt ? c.n_paths : 0), lt_comp_end(need_lt ? c.n_paths : 0);

    parallel_for(c.n_paths, c.threads, [&](std::size_t r) {
        const SigmaProcess src = source(r);
        const SkewSolution sol = solve(c, src, r);
        res.solutions.store(r, sol.y);
        if (need_source_ens)
            source_ens.store(r, sol.source.x);
        if (need_match)
            mismatches[r] = abs_mismatches(sol);
        if (need_azema)
            azema[r] = azema_yor_sup_error(sol.source.x, lt_compensator(sol.source).lt);
        if (need_residual || need_lt) {
            const double eps = c.eps.value_or(default_band_eps(sol.source.qv));
            const LocalTimeEstimate band = lt_band(sol.y, sol.source.qv, eps);
            if (need_residual)
                residuals[r] = residual_sample(sol, band);
            if (need_lt) {
                lt_band_end[r] = band.lt.back();
                lt_comp_end[r] = lt_compensator(sol.source).lt.back();
            }
        }
    });

    if (!verify)
        return res;

    EnsembleOptions opts;
    opts.n_paths = c.n_paths;
    opts.blocks = kMartingaleBlocks;
    opts.threads = c.threads;
    const double h = effective_horizon(c);

    for (const auto& spec : c.tests) {
        const std::string& name = spec.name;
        TestReport r;
        if (name == "occupation") {
            const double tol = spec.tolerance.value_or(2.0 / std::sqrt(static_cast<double>(c.n_paths)));
            const auto times = occupation_times(c, res.solutions);
            r = occupation_probability_test(res.solutions, c.schedule, times, tol);
        } else if (name == "ks") {
            r = skew_marginal_ks_test(res.solutions, c.schedule, res.solutions.time(res.solutions.n_points() - 1),
                                      c.level);
        } else if (name == "martingale") {
            r = martingale_increment_test(res.solutions, martingale_block(res.solutions), c.level);
        } else if (name == "martingale-source") {
            r = martingale_increment_test(source_ens, martingale_block(source_ens), c.level);
        } else if (name == "sde-residual") {
            r = sde_residual_test(residuals, spec.tolerance.value_or(kDefaultQvTolerance), c.level);
        } else if (name == "abs-match") {
            std::size_t total = 0;
            for (auto m : mismatches)
                total += m;
            r = abs_match_summary(total, c.n_paths, steps, c.seed);
        } else if (name == "azema-yor") {
            r = azema_yor_identity_test(azema, spec.tolerance.value_or(kDefaultAzemaYorTolerance));
        } else if (name == "transform-one" || name == "transform-exp") {
            const auto f = name == "transform-one" ? TabulatedFunction::unit() : TabulatedFunction::exp_decay();
            r = transform_martingale_test(source, f, c.seed, c.level, opts);
        } else if (name == "balayage") {
            const StepFunction k({0.0, 0.5 * h}, {1.0, -1.0});
            r = balayage_identity_test(source, k, c.seed, c.level, opts);
        } else if (name == "sigma-membership") {
            r = sigma_membership_test(source, c.seed, c.level, opts);
        } else if (name == "local-time") {
            CompensatedSum band, comp;
            for (std::size_t i = 0; i < c.n_paths; ++i) {
                band.add(lt_band_end[i]);
                comp.add(lt_comp_end[i]);
            }
            const double mb = band.value() / static_cast<double>(c.n_paths);
            const double mc = comp.value() / static_cast<double>(c.n_paths);
            r.statistic = mc > 0.0 ? std::abs(mb - mc) / mc : std::abs(mb - mc);
            r.threshold = spec.tolerance.value_or(kDefaultLocalTimeTolerance);
            r.pass = r.statistic <= r.threshold;
            r.notes = "rule: statistic <= threshold; relative gap between ensemble means of the band estimate of y "
                      "and the compensator of x at the horizon; band mean " + num(mb) + " compensator mean " + num(mc);
        }
        const std::size_t reported_steps = (name == "transform-one" || name == "transform-exp" ||
                                            name == "balayage" || name == "sigma-membership")
                                               ? source_steps(c)
                                               : steps;
        stamp(r, name, c, reported_steps);
        const bool inverted =
            std::find(c.expect_fail.begin(), c.expect_fail.end(), name) != c.expect_fail.end();
        if (inverted)
            r.notes += "; expected to fail";
        res.all_ok = res.all_ok && (r.pass != inverted);
        res.reports.push_back(std::move(r));
        res.expected_fail.push_back(inverted);
    }
    return res;
}

void write_ensemble(std::ostream& out, const Ensemble& e, OutputFormat format)
{
    if (format == OutputFormat::csv) {
        out << "replicate,t,y\n";
        for (std::size_t p = 0; p < e.n_paths(); ++p)
            for (std::size_t k = 0; k < e.n_points(); ++k)
                out << p << ',' << num(e.time(k)) << ',' << num(e.value(p, k)) << '\n';
        return;
    }
    out << "{\n  \"t\": [";
    for (std::size_t k = 0; k < e.n_points(); ++k)
        out << (k ? ", " : "") << num(e.time(k));
    out << "],\n  \"y\": [\n";
    for (std::size_t p = 0; p < e.n_paths(); ++p) {
        out << "    [";
        for (std::size_t k = 0; k < e.n_points(); ++k)
            out << (k ? ", " : "") << num(e.value(p, k));
        out << (p + 1 < e.n_paths() ? "],\n" : "]\n");
    }
    out << "  ]\n}\n";
}

void write_outputs(const CampaignConfig& cfg, const CampaignResult& result, bool with_reports)
{
    CampaignConfig c = cfg;
    if (c.tests.empty())
        c.tests = default_tests(c);
    namespace fs = std::filesystem;
    const fs::path dir(c.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
        return f;
    };
    {
        auto f = open(c.format == OutputFormat::json ? "ensemble.json" : "ensemble.csv");
        write_ensemble(f, result.solutions, c.format);
    }
    {
        auto f = open("manifest.json");
        f << manifest_json(c);
    }
    if (with_reports) {
        auto j = open("report.json");
        write_reports_json(j, result.reports);
        auto d = open("report.csv");
        write_digest_csv(d, result.reports);
    }
}

std::vector<TestReport> merge_reports(std::vector<std::vector<TestReport>> inputs)
{
    std::vector<TestReport> all;
    for (auto& v : inputs)
        for (auto& r : v)
            all.push_back(std::move(r));
    std::stable_sort(all.begin(), all.end(), [](const TestReport& a, const TestReport& b) { return a.name < b.name; });
    return all;
}

} // namespace sigma_skew
