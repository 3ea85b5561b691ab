#include "sigma_skew/local_time.hpp"
#include "sigma_skew/process.hpp"
#include "sigma_skew/rng.hpp"
#include "sigma_skew/skew_solution.hpp"
#include "sigma_skew/stat_checks.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace sigma_skew;
namespace fs = std::filesystem;

namespace {

const double kMeanAbs = std::sqrt(2.0 / M_PI);
const unsigned kThreads = std::max(1u, std::thread::hardware_concurrency());

std::atomic<std::size_t> g_mismatches{0};
std::size_t g_checked = 0;
int g_failures = 0;

void verdict(int n, bool pass, const std::string& detail)
{
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
    g_failures += !pass;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

SourceFactory source(ProcessKind kind, std::size_t steps, double dt, std::uint64_t seed, SigmaParams base = {})
{
    base.second_seed = derive_seed(seed, StreamTag::second_driver, 0);
    const std::uint64_t driver = derive_seed(seed, StreamTag::driver, 0);
    return [=](std::uint64_t r) {
        SigmaParams p = base;
        p.replicate = r;
        return make_sigma_process(kind, steps, dt, driver, p);
    };
}

/// Ensemble of solutions; every solution is checked for |y| = x on the way.
Ensemble solutions(std::size_t n, std::size_t steps, double dt, std::size_t stride,
                   const std::function<SkewSolution(std::uint64_t)>& make)
{
    g_checked += n;
    return collect_ensemble(n, steps, dt, stride, kThreads, [&](std::uint64_t r) {
        SkewSolution s = make(r);
        g_mismatches += abs_mismatches(s);
        return std::move(s.y);
    });
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

void criteria_1_2()
{
    const double dt = 1.0 / 4096;
    const auto src = source(ProcessKind::abs_bm, 4096, dt, 101);
    const auto sch = AlphaSchedule::constant(0.7);
    const auto e = solutions(200000, 4096, dt, 4096,
                             [&](std::uint64_t r) { return build_direct(src(r), sch, derive_seed(101, StreamTag::sign, r)); });
    const double t[] = {1.0};
    const auto occ = occupation_probability_test(e, sch, t, 0.005);
    verdict(1, occ.pass, fmt("|P(Y_1 > 0) - 0.7| = %.5f <= 0.005 (200000 paths, dt 2^-12)", occ.statistic));
    const auto ks = skew_marginal_ks_test(e, sch, 1.0, 0.01);
    verdict(2, ks.pass, fmt("KS distance %.5f < 1.6276/sqrt(n) = %.5f (200000 paths)", ks.statistic, ks.threshold));
}

void criterion_3()
{
    const double dt = 1.0 / 4096;
    const auto src = source(ProcessKind::abs_bm, 4096, dt, 103);
    const auto half = AlphaSchedule::constant(0.5);
    const auto y = solutions(20000, 4096, dt, 512,
                             [&](std::uint64_t r) { return build_direct(src(r), half, derive_seed(103, StreamTag::sign, r)); });
    const auto my = martingale_increment_test(y, 1, 0.01);
    const auto raw = collect_ensemble(20000, 4096, dt, 512, kThreads, [&](std::uint64_t r) { return src(r).x; });
    const auto mr = martingale_increment_test(raw, 1, 0.01);
    verdict(3, my.pass && !mr.pass,
            fmt("Y^{1/2} p = %.4f >= 0.01; raw |B| p = %.3g < 0.01 (expected fail) (20000 paths)", *my.p_value,
                *mr.p_value));
}

void criterion_4()
{
    const std::size_t steps = 1 << 14;
    const double dt = 1.0 / steps;
    const std::size_t n = 10000;
    std::vector<double> band(n), tan(n);
    const std::uint64_t key = derive_seed(104, StreamTag::driver, 0);
    parallel_for(n, kThreads, [&](std::size_t r) {
        const Path b = generate_bm(steps, dt, key, r);
        band[r] = lt_band(b, realized_qv(b), 0.01).lt.back();
        tan[r] = lt_tanaka(b).lt.back();
    });
    double mb = 0.0, mt = 0.0, md = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        mb += band[r];
        mt += tan[r];
        md += std::abs(band[r] - tan[r]);
    }
    mb /= n;
    mt /= n;
    md /= n;
    const double eb = std::abs(mb / kMeanAbs - 1.0), et = std::abs(mt / kMeanAbs - 1.0);
    verdict(4, eb <= 0.05 && et <= 0.03 && md <= 0.05,
            fmt("band mean %.4f (rel err %.4f <= 0.05), tanaka mean %.4f (rel err %.4f <= 0.03), ", mb, eb, mt, et) +
                fmt("mean |band - tanaka| %.4f <= 0.05 (10000 paths, dt 2^-14, eps 0.01)", md));
}

ResidualSample residual(const SkewSolution& s)
{
    return residual_sample(s, lt_band(s.y, s.source.qv, default_band_eps(s.source.qv)));
}

void criterion_5()
{
    const std::size_t steps = 1 << 14;
    const double dt = 1.0 / steps;
    const std::size_t n = 10000;
    const auto sch = AlphaSchedule::constant(0.7);
    std::vector<ResidualSample> direct(n), changed(n);
    {
        const auto src = source(ProcessKind::abs_bm, steps, dt, 105);
        parallel_for(n, kThreads, [&](std::size_t r) {
            const auto s = build_direct(src(r), sch, derive_seed(105, StreamTag::sign, r));
            g_mismatches += abs_mismatches(s);
            direct[r] = residual(s);
        });
    }
    {
        SigmaParams p;
        p.sigma = StepFunction::constant(2.0);
        const auto src = source(ProcessKind::scaled_abs, steps, dt, 106, p);
        parallel_for(n, kThreads, [&](std::size_t r) {
            const auto s = build_time_changed(src(r), sch, derive_seed(106, StreamTag::sign, r), 1.0);
            g_mismatches += abs_mismatches(s);
            changed[r] = residual(s);
        });
    }
    g_checked += 2 * n;
    const auto a = sde_residual_test(direct, 0.02, 0.01), b = sde_residual_test(changed, 0.02, 0.01);
    auto qv_dev = [](const std::vector<ResidualSample>& v) {
        double m = 0.0;
        for (const auto& s : v)
            m += s.qv_at_horizon;
        return std::abs(m / static_cast<double>(v.size()) - v.front().horizon) / v.front().horizon;
    };
    verdict(5, a.pass && b.pass,
            fmt("direct: qv dev %.4f <= 0.02, KS %.5f < %.5f; ", qv_dev(direct), a.statistic, a.threshold) +
                fmt("sigma=2 time-changed: qv dev %.4f <= 0.02, KS %.5f < %.5f (10000 paths, dt 2^-14)",
                    qv_dev(changed), b.statistic, b.threshold));
}

void criterion_6()
{
    const double dt = 1.0 / 4096;
    const auto src = source(ProcessKind::abs_bm, 8192, dt, 107);
    const auto sch = AlphaSchedule::parse("0:0.3,1:0.8");
    const auto e = solutions(100000, 8192, dt, 2048,
                             [&](std::uint64_t r) { return build_direct(src(r), sch, derive_seed(107, StreamTag::sign, r)); });
    double worst = 0.0;
    std::string detail;
    for (double t : {0.5, 1.5}) {
        const double one[] = {t};
        const auto r = occupation_probability_test(e, sch, one, 0.01);
        worst = std::max(worst, r.statistic);
        detail += fmt("t=%.1f dev %.5f; ", t, r.statistic);
    }
    verdict(6, worst <= 0.01, detail + "each <= 0.01 (100000 paths, horizon 2)");
}

void criterion_7()
{
    // tau inversion on piecewise volatility clocks
    double worst = 0.0;
    bool ok = true;
    SigmaParams p;
    p.sigma = StepFunction::parse("0:1,0.25:2,0.5:0.5");
    const double dt = 1.0 / 4096;
    const auto src = source(ProcessKind::scaled_abs, 4096, dt, 108, p);
    for (std::uint64_t r = 0; r < 20; ++r) {
        const SigmaProcess s = src(r);
        const double h = std::floor(s.qv.values.back() / dt) * dt;
        const auto idx = time_change_indices(s.qv, h, dt);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const double t = static_cast<double>(k) * dt;
            const std::size_t j = idx[k];
            const double cell = j > 0 ? s.qv.values[j] - s.qv.values[j - 1] : 0.0;
            const double err = s.qv.values[j] - t;
            ok = ok && err >= -1e-12 && err <= cell + 1e-12 && (j == 0 || s.qv.values[j - 1] < t);
            if (cell > 0.0)
                worst = std::max(worst, err / cell);
        }
    }
    // alpha = 1 reproduces |X|
    bool identity = true;
    const auto abs_src = source(ProcessKind::abs_bm, 4096, dt, 109);
    for (std::uint64_t r = 0; r < 200; ++r) {
        const auto s = abs_src(r);
        identity = identity && build_direct(s, AlphaSchedule::constant(1.0), r).y.values == s.x.values;
    }
    const std::size_t mism = g_mismatches.load();
    verdict(7, ok && identity && mism == 0,
            std::to_string(mism) + " |Y| != X mismatches over " + std::to_string(g_checked) +
                " acceptance solutions; " + fmt("tau error <= %.3f qv cells (<= 1); ", worst) +
                (identity ? "alpha = 1 gives |X| bit-exactly" : "alpha = 1 differs from |X|"));
}

void criterion_8()
{
    const std::size_t steps = 1 << 14;
    const double dt = 1.0 / steps;
    const auto src = source(ProcessKind::abs_bm, steps, dt, 110);
    std::vector<double> errs(2000);
    parallel_for(errs.size(), kThreads, [&](std::size_t r) {
        const auto s = src(r);
        errs[r] = azema_yor_sup_error(s.x, lt_compensator(s).lt);
    });
    const auto az = azema_yor_identity_test(errs, 0.05);
    EnsembleOptions o;
    o.n_paths = 20000;
    o.threads = kThreads;
    const auto t1 = transform_martingale_test(src, TabulatedFunction::unit(), 110, 0.01, o);
    const auto t2 = transform_martingale_test(src, TabulatedFunction::exp_decay(), 110, 0.01, o);
    const auto pr = sigma_membership_test(source(ProcessKind::product_abs, steps, dt, 111), 111, 0.01, o);
    verdict(8, az.pass && t1.pass && t2.pass && pr.pass,
            fmt("Azema-Yor median sup-error %.4f <= 0.05; transform f=1 p = %.4f, f=exp(-x) p = %.4f; ", az.statistic,
                *t1.p_value, *t2.p_value) +
                fmt("product_abs membership p = %.4f (all >= 0.01; 20000 paths, dt 2^-14)", *pr.p_value));
}

void criterion_9()
{
    const fs::path base = fs::path(SIGMA_SKEW_TEST_WORKDIR) / "acceptance_repro";
    fs::remove_all(base);
    const std::string args = " verify --process abs-bm --alpha 0.7 --paths 2000 --steps 4096 --dt 0.000244140625 --seed 9"
                             " --tests occupation,ks,abs-match,sde-residual,azema-yor,local-time --out ";
    bool same = true;
    std::string files;
    int codes = 0;
    for (unsigned threads : {1u, 4u}) {
        const std::string cmd = "\"" SIGMA_SKEW_CLI "\"" + args + (base / std::to_string(threads)).string() +
                                " --threads " + std::to_string(threads) + " >/dev/null";
        codes += std::system(cmd.c_str()) != 0;
    }
    for (const char* f : {"ensemble.csv", "manifest.json", "report.json", "report.csv"}) {
        const std::string a = slurp(base / "1" / f), b = slurp(base / "4" / f);
        same = same && !a.empty() && a == b;
        files += std::string(files.empty() ? "" : ", ") + f;
    }
    verdict(9, same && codes == 0,
            std::string(same ? "byte-identical " : "differing ") + files + " for --threads 1 and 4");
}

} // namespace

int main()
{
    const auto t0 = std::chrono::steady_clock::now();
    criteria_1_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 9 criteria failed (%.0f s, %u threads)\n", g_failures, secs, kThreads);
    return g_failures == 0 ? 0 : 1;
}
