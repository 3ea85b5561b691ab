#include "sigma_skew/campaign.hpp"
#include "sigma_skew/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sigma_skew;

namespace {

struct RawOptions {
    std::string process = "abs-bm";
    std::optional<double> alpha;
    std::string alpha_schedule;
    std::string sigma;
    std::size_t paths = 1000;
    std::size_t steps = 4096;
    double dt = 1.0 / 4096.0;
    std::optional<double> horizon;
    std::uint64_t seed = 42;
    std::optional<double> eps;
    std::size_t stride = 0;
    std::string tests;
    std::string expect_fail;
    double level = 0.01;
    std::string out;
    std::string format = "csv";
    unsigned threads = 1;
    std::string manifest;
};

void add_campaign_options(CLI::App* cmd, RawOptions& o)
{
    cmd->add_option("--process", o.process, "abs-bm | drawdown | scaled-abs | product-abs");
    auto* a = cmd->add_option("--alpha", o.alpha, "constant skewness in [0,1]");
    auto* s = cmd->add_option("--alpha-schedule", o.alpha_schedule, "piecewise alpha, e.g. 0:0.3,1:0.8");
    a->excludes(s);
    cmd->add_option("--sigma", o.sigma, "volatility of scaled-abs as time:value list");
    cmd->add_option("--paths", o.paths, "number of replicates");
    cmd->add_option("--steps", o.steps, "grid steps of the driving path");
    cmd->add_option("--dt", o.dt, "grid step");
    cmd->add_option("--horizon", o.horizon, "horizon of the solution (default steps * dt)");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--eps", o.eps, "band half-width of the local time estimator");
    cmd->add_option("--stride", o.stride, "grid steps between stored observations");
    cmd->add_option("--tests", o.tests, "comma list of tests, optionally name=tolerance");
    cmd->add_option("--level", o.level, "significance level");
    cmd->add_option("--expect-fail", o.expect_fail, "comma list of tests expected to fail");
    cmd->add_option("--out", o.out, "output directory (default $SIGMA_SKEW_OUT or .)");
    cmd->add_option("--format", o.format, "ensemble format: csv | json");
    cmd->add_option("--threads", o.threads, "worker threads");
}

std::vector<std::string> split(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::string default_out(const std::string& given)
{
    if (!given.empty())
        return given;
    const char* env = std::getenv("SIGMA_SKEW_OUT");
    return env && *env ? env : ".";
}

CampaignConfig to_config(const RawOptions& o)
{
    CampaignConfig c;
    if (!o.manifest.empty()) {
        std::ifstream in(o.manifest);
        if (!in)
            throw ParameterError("manifest: cannot read '" + o.manifest + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        c = config_from_manifest(buf.str());
    } else {
        c.process = parse_process_kind(o.process);
        if (o.alpha)
            c.schedule = AlphaSchedule::constant(*o.alpha);
        else if (!o.alpha_schedule.empty())
            c.schedule = AlphaSchedule::parse(o.alpha_schedule);
        if (!o.sigma.empty())
            c.sigma = StepFunction::parse(o.sigma);
        c.n_paths = o.paths;
        c.n_steps = o.steps;
        c.dt = o.dt;
        c.horizon = o.horizon;
        c.seed = o.seed;
        c.eps = o.eps;
        c.stride = o.stride;
        if (!o.tests.empty())
            c.tests = parse_test_list(o.tests);
        c.expect_fail = split(o.expect_fail);
        c.level = o.level;
        if (o.format != "csv" && o.format != "json")
            throw ParameterError("format: expected csv or json");
        c.format = o.format == "json" ? OutputFormat::json : OutputFormat::csv;
    }
    c.out_dir = default_out(o.out);
    c.threads = o.threads;
    return c;
}

int simulate(const RawOptions& o)
{
    const CampaignConfig c = to_config(o);
    const auto res = run_campaign(c, false);
    write_outputs(c, res, false);
    std::cout << "wrote " << c.n_paths << " paths to " << c.out_dir << "\n";
    return 0;
}

int verify(const RawOptions& o)
{
    const CampaignConfig c = to_config(o);
    const auto res = run_campaign(c, true);
    write_outputs(c, res, true);
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
        const auto& r = res.reports[i];
        const bool ok = r.pass != res.expected_fail[i];
        std::cout << (ok ? "ok   " : "FAIL ") << r.name << " statistic=" << r.statistic
                  << " threshold=" << r.threshold << (res.expected_fail[i] ? " (expected fail)" : "") << "\n";
    }
    return res.all_ok ? 0 : 1;
}

int report(const std::vector<std::string>& files, const std::string& out)
{
    if (files.empty())
        throw ParameterError("report: need at least one report file");
    std::vector<std::vector<TestReport>> inputs;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in)
            throw ParameterError("report: cannot read '" + f + "'");
        inputs.push_back(read_reports_json(in));
    }
    const auto merged = merge_reports(std::move(inputs));
    if (out.empty()) {
        write_digest_csv(std::cout, merged);
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write '" + out + "'");
        write_digest_csv(f, merged);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Skew Brownian motion from class-(Sigma) processes: simulate, verify, report"};
    app.require_subcommand(1);

    RawOptions sim_opts, ver_opts;
    auto* sim = app.add_subcommand("simulate", "simulate an ensemble of skew solutions");
    add_campaign_options(sim, sim_opts);
    auto* ver = app.add_subcommand("verify", "simulate and run the statistical checks");
    add_campaign_options(ver, ver_opts);
    ver->add_option("--manifest", ver_opts.manifest, "rerun the configuration recorded in a manifest");

    std::vector<std::string> report_files;
    std::string report_out;
    auto* rep = app.add_subcommand("report", "merge report.json files into one digest CSV");
    rep->add_option("files", report_files, "report.json files")->required();
    rep->add_option("--out", report_out, "digest file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sim)
            return simulate(sim_opts);
        if (*ver)
            return verify(ver_opts);
        return report(report_files, report_out);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientQvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConstructionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
