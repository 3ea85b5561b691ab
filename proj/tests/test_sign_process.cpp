#include "sigma_skew/errors.hpp"
#include "sigma_skew/excursions.hpp"
#include "sigma_skew/process.hpp"
#include "sigma_skew/sign_process.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace sigma_skew;

namespace {

// 0,1,0,1,0,... : one excursion per pair of samples.
ExcursionDecomposition comb(std::size_t excursions)
{
    std::vector<double> v(2 * excursions + 1, 0.0);
    for (std::size_t i = 1; i < v.size(); i += 2)
        v[i] = 1.0;
    return decompose(make_path(0.0, 1.0, std::move(v)), 0.0);
}

} // namespace

TEST_CASE("alpha bounds")
{
    const auto dec = comb(4);
    CHECK_THROWS_WITH_AS(sample_z_alpha(dec, 1.3, 1), "alpha out of [0,1]", ParameterError);
    CHECK_THROWS_WITH_AS(sample_z_alpha(dec, -0.1, 1), "alpha out of [0,1]", ParameterError);
    CHECK_THROWS_WITH_AS(AlphaSchedule::parse("0:0.3,1:1.5"), "alpha out of [0,1]", ParameterError);
    CHECK_THROWS_AS(AlphaSchedule::parse("0.5:0.3"), ParameterError);
}

TEST_CASE("degenerate alphas force the signs")
{
    const auto dec = comb(50);
    const auto up = sample_z_alpha(dec, 1.0, 3), down = sample_z_alpha(dec, 0.0, 3);
    for (const auto& s : up.excursion_signs)
        CHECK(s.zeta == 1);
    for (const auto& s : down.excursion_signs)
        CHECK(s.zeta == -1);
    for (std::size_t j = 0; j < dec.size(); ++j) {
        CHECK(up.values[j] == (dec.zero_mask[j] ? 0 : 1));
        CHECK(down.values[j] == (dec.zero_mask[j] ? 0 : -1));
    }
}

TEST_CASE("sign fraction matches alpha")
{
    const auto dec = comb(100000);
    const auto sp = sample_z_alpha(dec, 0.7, 99);
    std::size_t pos = 0;
    for (const auto& s : sp.excursion_signs)
        pos += s.zeta == 1;
    CHECK(std::abs(static_cast<double>(pos) / 100000.0 - 0.7) <= 0.005);
}

TEST_CASE("constant schedule equals the homogeneous sampler")
{
    const SigmaProcess p = make_sigma_process(ProcessKind::abs_bm, 2048, 1.0 / 2048, 6);
    const auto dec = decompose(p.x, 0.0);
    const auto a = sample_z_alpha(dec, 0.3, 11);
    const auto b = sample_z_alpha_schedule(dec, AlphaSchedule::constant(0.3), 0.0, 1.0 / 2048, 11);
    CHECK(a.values == b.values);
    REQUIRE(a.excursion_signs.size() == b.excursion_signs.size());
    for (std::size_t i = 0; i < a.excursion_signs.size(); ++i)
        CHECK(a.excursion_signs[i].zeta == b.excursion_signs[i].zeta);
}

TEST_CASE("schedule signs switch at a breakpoint")
{
    // one excursion over [0, 2]
    std::vector<double> v(9, 1.0);
    v[0] = 0.0;
    v[8] = 0.0;
    const auto dec = decompose(make_path(0.0, 0.25, v), 0.0);
    const auto sp = sample_z_alpha_schedule(dec, AlphaSchedule::parse("0:1,1:0"), 0.0, 0.25, 5);
    const std::vector<std::int8_t> expect{0, 1, 1, 1, -1, -1, -1, -1, 0};
    CHECK(sp.values == expect);
    REQUIRE(sp.excursion_signs.size() == 2);
    CHECK(sp.excursion_signs[0].i == 0);
    CHECK(sp.excursion_signs[1].i == 1);
}

TEST_CASE("inhomogeneous sign fractions per interval")
{
    const AlphaSchedule sch = AlphaSchedule::parse("0:0.3,1:0.8");
    const std::size_t n = 100000;
    std::size_t pos[2] = {0, 0};
    for (std::size_t e = 0; e < n; ++e)
        for (std::size_t i = 0; i < 2; ++i)
            pos[i] += draw_sign(77, i, e, sch.level(i)) == 1;
    CHECK(std::abs(static_cast<double>(pos[0]) / n - 0.3) <= 0.005);
    CHECK(std::abs(static_cast<double>(pos[1]) / n - 0.8) <= 0.005);

    // the sampler uses exactly these cell draws
    const SigmaProcess p = make_sigma_process(ProcessKind::abs_bm, 4096, 1.0 / 2048, 6);
    const auto dec = decompose(p.x, 0.0);
    const auto sp = sample_z_alpha_schedule(dec, sch, 0.0, 1.0 / 2048, 77);
    bool saw[2] = {false, false};
    for (const auto& s : sp.excursion_signs) {
        CHECK(s.zeta == draw_sign(77, s.i, s.n, sch.level(s.i)));
        saw[s.i] = true;
    }
    CHECK(saw[0]);
    CHECK(saw[1]);
}

TEST_CASE("cadlag companion k")
{
    const auto dec = decompose(make_path(0.0, 1.0, {0, 1, 2, 1, 0, 0}), 0.0);
    const auto sp = sample_z_alpha(dec, 1.0, 1);
    const Path k = to_cadlag_k(sp, dec);
    const std::vector<double> expect{1, 1, 1, 1, 0, 0};
    CHECK(k.values == expect);

    const SigmaProcess p = make_sigma_process(ProcessKind::abs_bm, 4096, 1.0 / 4096, 21);
    const auto d = decompose(p.x, 0.0);
    for (double alpha : {0.3, 1.0}) {
        const auto s = sample_z_alpha(d, alpha, 8);
        const Path kk = to_cadlag_k(s, d, 0.0, p.x.dt);
        for (std::size_t i = 0; i < p.x.size(); ++i) {
            CHECK(kk.values[d.gamma[i]] * p.x.values[i] == s.values[i] * p.x.values[i]);
            if (alpha == 1.0)
                CHECK(kk.values[d.gamma[i]] * p.x.values[i] == p.x.values[i]);
            CHECK(std::abs(s.values[i]) == (d.zero_mask[i] ? 0 : 1));
        }
    }
}

TEST_CASE("signs are a pure function of (seed, interval, excursion)")
{
    const auto dec = comb(200);
    const auto a = sample_z_alpha(dec, 0.5, 4);
    for (std::size_t n = 200; n-- > 0;)
        CHECK(a.excursion_signs[n].zeta == draw_sign(4, 0, n, 0.5));
}

TEST_CASE("sign csv")
{
    const auto dec = decompose(make_path(0.0, 1.0, {0, 1, 0}), 0.0);
    const auto sp = sample_z_alpha(dec, 1.0, 1);
    std::ostringstream a, b;
    write_csv(a, sp);
    write_sign_table(b, sp);
    CHECK(a.str() == "index,sign\n0,0\n1,1\n2,0\n");
    CHECK(b.str() == "n,i,zeta\n0,0,1\n");
}
