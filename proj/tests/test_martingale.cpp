#include "branchlab/error.hpp"
#include "branchlab/martingale.hpp"
#include "branchlab/parallel.hpp"
#include "branchlab/verify.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace branchlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("z at time zero is the eigenfunction", "[martingale]")
{
    const auto p = params_p0();
    const auto s = spectral(p, -0.3);
    const std::vector<Particle> one{{"", 2.0, 1.5, 0.0}};
    CHECK_THAT(log_z(one, 0.0, p, -0.3, Sign::minus).value(), WithinAbs(s.psi_minus * 2.25 - 0.6, 1e-15));
    CHECK_THAT(log_z(one, 0.0, p, -0.3, Sign::plus).value(), WithinAbs(s.psi_plus * 2.25 - 0.6, 1e-15));
    CHECK(log_z({}, 1.0, p, -0.3, Sign::minus).is_neg_inf());
    CHECK_THROWS_AS(z_value(PopulationSnapshot{}, p, -0.3, Sign::minus), Error);
}

TEST_CASE("z is additive over disjoint particle sets", "[martingale][property]")
{
    const auto p = params_p0();
    const std::vector<Particle> a{{"1", -1.0, 0.3, 0.0}, {"21", 2.0, -2.0, 0.0}};
    const std::vector<Particle> b{{"22", -4.0, 25.0, 0.0}};
    std::vector<Particle> all = a;
    all.insert(all.end(), b.begin(), b.end());
    for (Sign sg : {Sign::minus, Sign::plus}) {
        const auto u = log_z(all, 1.5, p, -0.2, sg);
        const auto parts = log_add(log_z(a, 1.5, p, -0.2, sg), log_z(b, 1.5, p, -0.2, sg));
        CHECK_THAT(u.value(), WithinRel(parts.value(), 1e-14));
        CHECK(std::isfinite(u.value()));
    }
    // termwise ratio between the plus and minus terms
    const auto s = spectral(p, -0.2);
    const auto lp = log_z(b, 1.5, p, -0.2, Sign::plus).value();
    const auto lm = log_z(b, 1.5, p, -0.2, Sign::minus).value();
    CHECK_THAT(lp - lm, WithinAbs((s.psi_plus - s.psi_minus) * 625.0 - (s.e_plus - s.e_minus) * 1.5, 1e-10));
}

TEST_CASE("decay slope", "[martingale]")
{
    MartingaleSeries s{-0.3, Sign::plus, {}, false};
    for (double t : {1.0, 2.0, 3.0, 4.0})
        s.samples.push_back({t, -1.7 * t + 0.4});
    CHECK_THAT(decay_slope(s, 1.0, 4.0), WithinAbs(-1.7, 1e-13));
    CHECK_THROWS_AS(decay_slope(s, 3.0, 4.0), Error);

    PopulationSnapshot trunc{1.0, {}, true};
    PopulationSnapshot ok{0.0, {{"", 0.0, 0.0, 0.0}}, false};
    const std::vector<PopulationSnapshot> snaps{ok, trunc};
    CHECK(build_series(snaps, params_p0(), -0.3, Sign::minus, true).samples.size() == 1);
}

TEST_CASE("f0 constant", "[martingale]")
{
    const auto p = params_p0();
    const double s0 = spectral(p, 0.0).psi_minus;
    const double expected = std::pow(std::sqrt(5.0) / 10.0, 0.25) / std::sqrt(1.0 - 2.0 * s0);
    CHECK_THAT(f0_constant(p, [](double) { return 1.0; }, 0.0, 0.0), WithinRel(expected, 1e-12));
    CHECK_THAT(expected, WithinAbs(0.8083881, 1e-7));
    CHECK(f0_constant(p, [](double) { return 0.0; }, 0.0, 0.0) == 0.0);
    const std::vector<double> brk{-1.0, 1.0};
    const double band = f0_constant(p, [](double y) { return std::abs(y) <= 1.0 ? 1.0 : 0.0; }, 0.0, -0.3, brk);
    CHECK(band < f0_constant(p, [](double) { return 1.0; }, 0.0, -0.3));
    CHECK(band > 0.0);
    CHECK_THROWS_AS(f0_constant(p, [](double) { return 1.0; }, 0.25, 0.0), Error);
    CHECK_THROWS_AS(f0_constant(p, [](double) { return 1.0; }, 0.0, -0.69), Error);
}

TEST_CASE("ratio check with alpha matching the martingale weight", "[martingale]")
{
    // alpha = psi- makes the numerator sum equal the denominator term by term
    const auto p = params_low_rho();
    const double lambda = -0.3;
    const double alpha = spectral(p, lambda).psi_minus;
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.snapshot_times = {0.5, 1.0};
    const auto runs = parallel_map(20, [&](std::size_t i) { return run(p, {}, cfg, i); });
    REQUIRE(alpha < 0.25);
    const auto self = ratio_limit_check(runs, p, [](double) { return 1.0; }, alpha, lambda);
    REQUIRE(self.ratios.size() == 20);
    for (double r : self.ratios)
        CHECK_THAT(r, WithinAbs(1.0, 1e-12));
}

TEST_CASE("pathwise bounds hold on simulated snapshots", "[martingale][property]")
{
    const auto p = params_p0();
    SimConfig cfg;
    cfg.horizon = 1.0;
    cfg.snapshot_times = {0.0, 0.5, 1.0};
    for (std::uint64_t r = 0; r < 50; ++r)
        for (const auto& s : run(p, {0.3, -0.4}, cfg, r))
            CHECK(pathwise_bound_violations(s, p) == 0);
}

TEST_CASE("Z minus has constant mean", "[martingale]")
{
    const auto p = params_p0();
    SimConfig cfg;
    cfg.horizon = 0.5;
    cfg.c_step = 0.01;
    cfg.h_max = 0.01;
    cfg.seed = 99;
    const auto w = parallel_map(4000, [&](std::size_t i) {
        return std::exp(z_value(run(p, {0.0, 0.5}, cfg, i).back(), p, -0.3, Sign::minus)
                        - z_value(PopulationSnapshot{0.0, {{"", 0.0, 0.5, 0.0}}, false}, p, -0.3, Sign::minus));
    });
    CHECK(within_se(summarize(w, 99), 1.0));
}
