#pragma once

#include "sigma_skew/path.hpp"
#include "sigma_skew/process.hpp"
#include "sigma_skew/sign_process.hpp"
#include "sigma_skew/stat_checks.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sigma_skew {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class OutputFormat { csv, json };

/// Test names accepted by verify, in their canonical order.
const std::vector<std::string>& known_tests();

struct TestSpec {
    std::string name;
    /// Overrides the tolerance (distance tests) of this test.
    std::optional<double> tolerance;
};

/// Parses "occupation=0.005,ks,abs-match". Throws ParameterError on an
/// unknown name or a bad tolerance.
std::vector<TestSpec> parse_test_list(const std::string& text);

struct CampaignConfig {
    ProcessKind process = ProcessKind::abs_bm;
    AlphaSchedule schedule = AlphaSchedule::constant(0.5);
    StepFunction sigma = StepFunction::constant(1.0);
    std::size_t n_paths = 1000;
    std::size_t n_steps = 4096;
    double dt = 1.0 / 4096.0;
    std::optional<double> horizon;
    std::uint64_t seed = 42;
    std::optional<double> eps;
    /// Observation stride of the stored ensemble; 0 picks at most 64 intervals.
    std::size_t stride = 0;
    std::vector<TestSpec> tests;
    std::vector<std::string> expect_fail;
    double level = 0.01;
    std::string out_dir = ".";
    OutputFormat format = OutputFormat::csv;
    unsigned threads = 1;
};

/// Throws ParameterError naming the offending field.
void validate(const CampaignConfig& c);

/// Horizon actually used: the configured one or n_steps * dt.
double effective_horizon(const CampaignConfig& c);
/// direct for abs_bm and drawdown, time_changed otherwise.
Construction construction_for(ProcessKind kind);
/// Tests run when none are requested.
std::vector<TestSpec> default_tests(const CampaignConfig& c);

std::string manifest_json(const CampaignConfig& c);
CampaignConfig config_from_manifest(const std::string& text);

struct CampaignResult {
    Ensemble solutions;
    std::vector<TestReport> reports;
    /// Per-report expectation after --expect-fail inversion.
    std::vector<bool> expected_fail;
    bool all_ok = true;
};

/// Simulates the ensemble; runs tests only when `verify` is set.
CampaignResult run_campaign(const CampaignConfig& c, bool verify);

/// `replicate,t,y` rows, or a JSON object with times and paths.
void write_ensemble(std::ostream& out, const Ensemble& e, OutputFormat format);

/// Writes ensemble + manifest (and reports when present) into c.out_dir.
void write_outputs(const CampaignConfig& c, const CampaignResult& result, bool with_reports);

/// Concatenation of all reports ordered by name (stable).
std::vector<TestReport> merge_reports(std::vector<std::vector<TestReport>> inputs);

} // namespace sigma_skew
