#include "sigma_skew/campaign.hpp"
#include "sigma_skew/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace sigma_skew;

namespace {

CampaignConfig small()
{
    CampaignConfig c;
    c.schedule = AlphaSchedule::constant(0.7);
    c.n_paths = 200;
    c.n_steps = 1024;
    c.dt = 1.0 / 1024;
    c.seed = 3;
    c.tests = parse_test_list("occupation=0.2,abs-match,ks");
    return c;
}

} // namespace

TEST_CASE("test list parsing")
{
    const auto t = parse_test_list("occupation=0.005,ks,,abs-match");
    REQUIRE(t.size() == 3);
    CHECK(t[0].name == "occupation");
    CHECK(*t[0].tolerance == 0.005);
    CHECK_FALSE(t[1].tolerance);
    CHECK_THROWS_WITH_AS(parse_test_list("nonsense"), "unknown test 'nonsense'", ParameterError);
    CHECK_THROWS_AS(parse_test_list("ks=abc"), ParameterError);
    CHECK_THROWS_AS(parse_test_list("ks=-1"), ParameterError);
    CHECK_THROWS_AS(parse_test_list(","), ParameterError);
    for (const auto& n : known_tests())
        CHECK(parse_test_list(n).front().name == n);
}

TEST_CASE("configuration validation")
{
    validate(small());
    auto bad = [](auto mutate, const char* msg) {
        CampaignConfig c = small();
        mutate(c);
        CHECK_THROWS_WITH_AS(validate(c), msg, ParameterError);
    };
    bad([](CampaignConfig& c) { c.n_paths = 0; }, "paths: need at least one path");
    bad([](CampaignConfig& c) { c.dt = 0.0; }, "dt: must be positive and finite");
    bad([](CampaignConfig& c) { c.horizon = 2.0; }, "horizon: must be positive and at most steps * dt");
    bad([](CampaignConfig& c) { c.horizon = 0.3; }, "horizon: must be a multiple of dt");
    bad([](CampaignConfig& c) { c.eps = 0.0; }, "eps: must be positive");
    bad([](CampaignConfig& c) { c.level = 1.0; }, "level: must lie in (0, 1)");
    bad([](CampaignConfig& c) { c.threads = 0; }, "threads: must be at least 1");
    bad([](CampaignConfig& c) { c.expect_fail = {"balayage"}; }, "expect-fail: 'balayage' is not among the tests run");
    bad([](CampaignConfig& c) { c.process = ProcessKind::custom; },
        "process: custom processes cannot be simulated from the command line");
    CampaignConfig c = small();
    c.stride = 3;
    CHECK_THROWS_AS(validate(c), ParameterError);
    CHECK(effective_horizon(small()) == 1.0);
    CHECK(construction_for(ProcessKind::abs_bm) == Construction::direct);
    CHECK(construction_for(ProcessKind::scaled_abs) == Construction::time_changed);
}

TEST_CASE("default tests")
{
    CampaignConfig c = small();
    auto names = [](const std::vector<TestSpec>& v) {
        std::vector<std::string> out;
        for (const auto& t : v)
            out.push_back(t.name);
        return out;
    };
    const auto d = names(default_tests(c));
    CHECK(std::find(d.begin(), d.end(), "ks") != d.end());
    c.schedule = AlphaSchedule::parse("0:0.3,0.5:0.8");
    const auto s = names(default_tests(c));
    CHECK(std::find(s.begin(), s.end(), "ks") == s.end());
    CHECK(s.front() == "occupation");
}

TEST_CASE("manifest round trip")
{
    CampaignConfig c = small();
    c.schedule = AlphaSchedule::parse("0:0.3,0.5:0.8");
    c.process = ProcessKind::scaled_abs;
    c.sigma = StepFunction::parse("0:1,0.5:2");
    c.eps = 0.02;
    c.horizon = 0.5;
    c.expect_fail = {"ks"};
    c.format = OutputFormat::json;
    const std::string m = manifest_json(c);
    const CampaignConfig back = config_from_manifest(m);
    CHECK(manifest_json(back) == m);
    CHECK(back.schedule.to_string() == c.schedule.to_string());
    CHECK(*back.eps == 0.02);
    CHECK(*back.tests[0].tolerance == 0.2);
    CHECK(m.find("seed_derivation") != std::string::npos);
    CHECK_THROWS_AS(config_from_manifest("{}"), ParameterError);
    CHECK_THROWS_AS(config_from_manifest("not json"), ParameterError);
}

TEST_CASE("campaign output does not depend on the thread count")
{
    CampaignConfig a = small();
    CampaignConfig b = small();
    b.threads = 4;
    const auto ra = run_campaign(a, true), rb = run_campaign(b, true);
    std::ostringstream ea, eb, ja, jb;
    write_ensemble(ea, ra.solutions, OutputFormat::csv);
    write_ensemble(eb, rb.solutions, OutputFormat::csv);
    CHECK(ea.str() == eb.str());
    write_reports_json(ja, ra.reports);
    write_reports_json(jb, rb.reports);
    CHECK(ja.str() == jb.str());
    CHECK(ra.all_ok);
    REQUIRE(ra.reports.size() == 3);
    CHECK(ra.reports[0].name == "occupation");
    CHECK(ra.reports[0].seed == 3);
    CHECK(ea.str().rfind("replicate,t,y\n0,0,0\n", 0) == 0);

    const auto sim = run_campaign(a, false);
    CHECK(sim.reports.empty());
    std::ostringstream es;
    write_ensemble(es, sim.solutions, OutputFormat::csv);
    CHECK(es.str() == ea.str());
}

TEST_CASE("expected failures invert the verdict")
{
    CampaignConfig c = small();
    c.tests = parse_test_list("martingale-source");
    c.n_paths = 2000;
    const auto plain = run_campaign(c, true);
    CHECK_FALSE(plain.all_ok);
    c.expect_fail = {"martingale-source"};
    const auto inv = run_campaign(c, true);
    CHECK(inv.all_ok);
    CHECK(inv.expected_fail[0]);
    CHECK(inv.reports[0].notes.find("expected to fail") != std::string::npos);
}

TEST_CASE("json ensemble and report merging")
{
    Ensemble e(2, 2, 0.5, 1);
    e.store(0, make_path(0.0, 0.5, {0.0, 1.0, -1.0}));
    e.store(1, make_path(0.0, 0.5, {0.0, 0.5, 0.25}));
    std::ostringstream j, csv;
    write_ensemble(j, e, OutputFormat::json);
    CHECK(j.str() == "{\n  \"t\": [0, 0.5, 1],\n  \"y\": [\n    [0, 1, -1],\n    [0, 0.5, 0.25]\n  ]\n}\n");
    write_csv(csv, e);
    CHECK(csv.str().rfind("replicate,t,value\n0,0,0\n0,0.5,1\n", 0) == 0);

    TestReport a, b, c;
    a.name = "ks";
    b.name = "abs-match";
    c.name = "ks";
    c.seed = 9;
    const auto m = merge_reports({{a}, {b, c}});
    REQUIRE(m.size() == 3);
    CHECK(m[0].name == "abs-match");
    CHECK(m[1].seed == 0);
    CHECK(m[2].seed == 9);
}
