#include "branchlab/birthdeath.hpp"
#include "branchlab/error.hpp"
#include "branchlab/numerics.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace branchlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("pure death and Yule closed forms", "[birthdeath]")
{
    const auto death = outcome_distribution(constant_schedule(0.0, 1.3, 2.0));
    CHECK_THAT(death.u_tau, WithinAbs(1.0 - std::exp(-2.6), 1e-12));
    CHECK_THAT(death.v_tau, WithinAbs(0.0, 1e-14));
    CHECK_THAT(death.mean, WithinRel(std::exp(-2.6), 1e-12));

    const auto yule = outcome_distribution(constant_schedule(0.7, 0.0, 2.0));
    CHECK_THAT(yule.u_tau, WithinAbs(0.0, 1e-12));
    CHECK_THAT(yule.v_tau, WithinAbs(1.0 - std::exp(-1.4), 1e-12));
    CHECK_THAT(yule.pmf(3), WithinRel(std::exp(-1.4) * std::pow(1.0 - std::exp(-1.4), 2), 1e-11));
}

TEST_CASE("constant birth-death law", "[birthdeath]")
{
    const double b = 1.2, d = 0.5, t = 2.0;
    const auto o = outcome_distribution(constant_schedule(b, d, t));
    const double e = std::exp((b - d) * t);
    const double ext = d * (e - 1.0) / (b * e - d);
    CHECK_THAT(o.extinction_prob, WithinRel(ext, 1e-11));
    CHECK_THAT(o.mean, WithinRel(e, 1e-12));
    CHECK_THAT(o.nu_tau, WithinAbs(-(b - d) * t, 1e-12));

    double total = 0.0;
    for (std::size_t n = 0; n < 400; ++n)
        total += o.pmf(n);
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    CHECK_THAT(o.tail(5), WithinAbs(1.0 - [&] {
                   double s = 0;
                   for (std::size_t n = 0; n <= 5; ++n)
                       s += o.pmf(n);
                   return s;
               }(),
                                   1e-13));
    CHECK_THAT(o.conditional_mean, WithinRel(o.mean / (1.0 - o.extinction_prob), 1e-12));
}

TEST_CASE("simulated law matches the closed form", "[birthdeath]")
{
    const auto s = constant_schedule(1.2, 0.5, 2.0);
    const auto o = outcome_distribution(s);
    const auto emp = simulate_bd(s, 11, 20000);
    CHECK(within_se(emp.mean, o.mean));
    CHECK(within_se(emp.extinction, o.extinction_prob));
    std::vector<double> obs, exp;
    for (std::size_t k = 0; k < emp.histogram.size(); ++k) {
        obs.push_back(static_cast<double>(emp.histogram[k]));
        exp.push_back(20000.0 * o.pmf(k));
    }
    exp.back() += 20000.0 * o.tail(emp.histogram.size() - 1);
    CHECK(chi_square_test(obs, exp).p_value > 0.001);

    const auto again = simulate_bd(s, 11, 20000);
    CHECK(again.histogram == emp.histogram);
}

TEST_CASE("time-varying rates", "[birthdeath]")
{
    // birth 1 + sin, death 0.5: nu has a closed form
    RateSchedule s{[](double t) { return 1.0 + std::sin(t); }, [](double) { return 0.5; }, 3.0};
    CHECK_THAT(nu(s, 3.0), WithinAbs(-(0.5 * 3.0 + 1.0 - std::cos(3.0)), 1e-12));
    const auto o = outcome_distribution(s);
    CHECK_THAT(o.mean, WithinRel(std::exp(-nu(s, 3.0)), 1e-10));
    const auto emp = simulate_bd(s, 3, 20000);
    CHECK(within_se(emp.mean, o.mean));
}

TEST_CASE("ascent schedule integrates to J", "[birthdeath]")
{
    const auto p = params_p0();
    const AscentSpec spec{1.0, 1.0, 100.0};
    const double tau = 6.0;
    const auto a = optimal_paths(p, spec, lambda_hat(p, spec, tau), tau);
    const auto s = ascent_schedule(p, a);
    for (double w : {1.0, 3.0, 6.0})
        CHECK_THAT(nu(s, w), WithinAbs(functional_J(p, a.x_path, a.y_path, w, FunctionalMode::at_s).j_value, 1e-8));
    CHECK(s.birth_rate(0.0) == p.rho);
}

TEST_CASE("survival approximation", "[birthdeath]")
{
    const auto s = constant_schedule(0.2, 3.0, 2.0);
    const auto a = survival_approximation(s);
    CHECK(a.applicable);
    CHECK_THAT(a.exact, WithinRel(1.0 - outcome_distribution(s).extinction_prob, 1e-10));
    CHECK_THAT(a.ratio, WithinAbs(1.0, 0.05));
    CHECK_FALSE(survival_approximation(constant_schedule(1.0, 0.5, 1.0)).applicable);
}

TEST_CASE("majorant violation is reported", "[birthdeath]")
{
    // a bump inside every majorant cell, zero at its ends and midpoint
    auto bump = [](double t) {
        const double frac = t * 1024.0 - std::floor(t * 1024.0);
        return 50.0 * std::max(0.0, 1.0 - std::abs(frac - 0.25) / 0.2);
    };
    RateSchedule s{[=](double t) { return 1.0 + bump(t); }, [](double) { return 0.1; }, 1.0};
    CHECK_THROWS_AS(simulate_bd(s, 1, 100, 1024, 1.05), Error);
}
