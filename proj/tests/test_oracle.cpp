#include "branchlab/error.hpp"
#include "branchlab/oracle.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace branchlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const BoundedFn kOne{[](double, double) { return 1.0; }, 1.0};

}  // namespace

TEST_CASE("expected population", "[oracle]")
{
    const auto p = params_p0();
    CHECK_THAT(expected_population(p, 1.0, 0.0), WithinAbs(8.529634, 1e-6));
    CHECK_THAT(expected_population(p, 0.0, 1.3), WithinAbs(1.0, 1e-14));
    CHECK_THAT(expected_population(params_low_rho(), 6.0, 0.0), WithinRel(5716.9467390028, 1e-10));
    const auto yule = validate_params(10.0, 1.0, 0.0, 1.0);
    CHECK_THAT(expected_population(yule, 2.0, 0.7), WithinRel(std::exp(2.0), 1e-14));
}

TEST_CASE("single-particle sampler", "[oracle]")
{
    const auto p = params_p0();
    OracleConfig cfg;
    cfg.h_max = 0.01;
    // the type is an OU process at the chosen rate with its stationary law
    std::vector<double> eta;
    for (std::size_t i = 0; i < 20000; ++i) {
        Stream rng(replica_key(4, i));
        eta.push_back(sample_single_particle(p, {2.0, 0.0}, {0.0, 0.0}, 3.0, cfg, rng).eta);
    }
    double m2 = 0.0;
    for (double v : eta)
        m2 += v * v;
    CHECK_THAT(m2 / 20000.0, WithinAbs(p.theta / 4.0, 0.1));
}

TEST_CASE("many-to-one and transformed oracles agree with the mean population", "[oracle]")
{
    const auto p = params_p0();
    const OracleConfig cfg{0.01, 0.005, 21};
    const double target = expected_population(p, 1.0, 0.0);
    const auto m2o = many_to_one_expectation(p, kOne, 1.0, {}, 20000, cfg);
    CHECK(within_se(m2o.result, target));
    const auto tr = transformed_expectation(p, -0.3, kOne, 1.0, {}, 20000, cfg);
    CHECK(within_se(tr.result, target));
    CHECK_FALSE(tr.unbounded_weight);

    // start away from the origin
    const auto off = transformed_expectation(p, -0.3, kOne, 0.5, {1.0, 0.8}, 20000, cfg);
    CHECK(within_se(off.result, expected_population(p, 0.5, 0.8)));
}

TEST_CASE("drift law of large numbers", "[oracle]")
{
    const auto p = params_p0();
    const double lambda = -0.3;
    const auto e = drift_lln(p, lambda, 20.0, 400, {0.05, 0.05, 5});
    // mean spatial drift lambda a E[eta^2] under the stationary law theta/(2 mu)
    const double drift = lambda * p.a * p.theta / (2.0 * mu_lambda(p, lambda));
    CHECK_THAT(drift, WithinAbs(-legendre_pair(p, lambda, LegendreDirection::lambda_to_gamma), 1e-12));
    CHECK(within_se(e, drift, 4.0));
    CHECK(e.mean < 0.0);
}
