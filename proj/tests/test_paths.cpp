#include "branchlab/error.hpp"
#include "branchlab/paths.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace branchlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const AscentSpec kSpec{1.0, 1.0, 100.0};

}  // namespace

TEST_CASE("clock", "[paths]")
{
    const auto p = params_p0();
    const double lbar = delta_gamma_kappa(p, 1.0, 1.0).argmin_lambda;
    CHECK_THAT(tau_of_t(p, lbar, 100.0), WithinAbs(0.943424, 1e-6));
    CHECK(tau_of_t(p, lbar, 1.0) == 0.0);
    const double lasc = theta_cost(p, 1.0, 1.0).lambda_bar_ascent;
    CHECK(tau_of_t(p, lasc, 9.0) == 0.0);
    CHECK_THAT(tau_of_t(p, lasc, 16.0), WithinAbs(0.159048, 1e-6));
}

TEST_CASE("lambda_hat", "[paths]")
{
    const auto p = params_p0();
    CHECK_THAT(lambda_hat(p, kSpec, 6.0), WithinAbs(-0.70092242, 1e-8));
    CHECK_THAT(lambda_hat(p, kSpec, 8.0), WithinAbs(-0.69912153976, 1e-9));
    CHECK_THAT(lambda_hat(p, kSpec, 20.0), WithinAbs(-0.6984307, 1e-7));
    // the root only exists for tau > 3 sqrt 2 at these parameters
    CHECK_THROWS_AS(lambda_hat(p, kSpec, 4.0), Error);
    CHECK_NOTHROW(lambda_hat(p, kSpec, 4.3));
}

TEST_CASE("optimal paths hit their endpoints", "[paths]")
{
    const auto p = params_p0();
    const double tau = 6.0;
    const double l = lambda_hat(p, kSpec, tau);
    const auto a = optimal_paths(p, kSpec, l, tau);
    CHECK(a.y_path(0.0).value == 0.0);
    CHECK(a.x_path(0.0).value == 0.0);
    CHECK_THAT(a.y_path(tau).value, WithinRel(10.0, 1e-13));
    CHECK_THAT(a.x_path(tau).value, WithinRel(-100.0, 1e-13));
    // derivatives against central differences
    for (double s : {0.5, 2.0, 5.5}) {
        const double h = 1e-6;
        CHECK_THAT(a.y_path(s).derivative,
                   WithinRel((a.y_path(s + h).value - a.y_path(s - h).value) / (2 * h), 1e-6));
        CHECK_THAT(a.x_path(s).derivative,
                   WithinRel((a.x_path(s + h).value - a.x_path(s - h).value) / (2 * h), 1e-6));
    }
    // lambda_hat makes lambda a int y^2 equal -beta t
    CHECK_THAT(l * p.a * optimal_y_square_integral(p, kSpec, l, tau), WithinRel(-100.0, 1e-10));
    CHECK_THROWS_AS(optimal_paths(p, kSpec, l, 0.0), Error);
}

TEST_CASE("J along the optimal pair matches the closed-form cost", "[paths]")
{
    const auto p = params_p0();
    for (double tau : {6.0, 8.0}) {
        const auto a = optimal_paths(p, kSpec, lambda_hat(p, kSpec, tau), tau);
        const auto j = functional_J(p, a.x_path, a.y_path, tau, FunctionalMode::sup);
        CHECK_THAT(j.j_value, WithinRel(a.cost, 1e-9));
        CHECK(j.quadrature_error_estimate < 1e-8 * std::abs(a.cost));
        CHECK_THAT(j.l_value, WithinRel(j.j_value, 1e-12));
        CHECK_THAT(j.argmax_s, WithinAbs(tau, 1e-12));
    }
}

TEST_CASE("cumulative J dips below zero on a slow climb", "[paths]")
{
    // the integrand at s = 0 is ydot(0)^2/(2 theta) - rho < 0 here
    const auto p = params_p0();
    const double tau = 6.0;
    const auto a = optimal_paths(p, kSpec, lambda_hat(p, kSpec, tau), tau);
    CHECK(functional_J(p, a.x_path, a.y_path, 0.05, FunctionalMode::at_s).j_value < 0.0);
}

TEST_CASE("perturbed paths cost more", "[paths][property]")
{
    const auto p = params_p0();
    const double tau = 6.0;
    const auto a = optimal_paths(p, kSpec, lambda_hat(p, kSpec, tau), tau);
    for (double eps : {-0.3, -0.05, 0.05, 0.3}) {
        auto bump = [=](double s) { return eps * std::sin(M_PI * s / tau); };
        const auto y = sampler_from_function([&, bump](double s) { return a.y_path(s).value + bump(s); }, tau);
        const auto x = sampler_from_function([&, bump](double s) { return a.x_path(s).value + 10.0 * bump(s); }, tau);
        CHECK(functional_J(p, x, y, tau, FunctionalMode::at_s).j_value > a.cost);
    }
}

TEST_CASE("quadrature error shrinks 16x per panel doubling", "[paths]")
{
    const auto p = params_p0();
    const double lam = theta_cost(p, 1.0, 1.0).lambda_bar_ascent;
    const auto a = optimal_paths(p, kSpec, lam, 1.0);
    const double exact = functional_J(p, a.x_path, a.y_path, 1.0, FunctionalMode::at_s, 1 << 14).j_value;
    double prev = std::abs(functional_J(p, a.x_path, a.y_path, 1.0, FunctionalMode::at_s, 16).j_value - exact);
    for (std::size_t n = 32; n <= 128; n *= 2) {
        const double err = std::abs(functional_J(p, a.x_path, a.y_path, 1.0, FunctionalMode::at_s, n).j_value - exact);
        CHECK(prev / err > 8.0);
        prev = err;
    }
}

TEST_CASE("integrand singularities", "[paths]")
{
    const auto p = params_p0();
    CHECK(j_integrand(p, {0.0, 0.0}, {0.0, 0.0}) == -p.rho);
    CHECK_THROWS_AS(j_integrand(p, {0.0, 1.0}, {0.0, 0.0}), Error);
}

TEST_CASE("ascent cost decreases toward Theta", "[paths]")
{
    const auto p = params_p0();
    const double theta = theta_cost(p, 1.0, 1.0).theta_bk;
    CHECK_THAT(ascent_cost_limit(p, 1.0, 1.0, 8.0), WithinAbs(0.96603447, 1e-8));
    double prev = ascent_cost_limit(p, 1.0, 1.0, 5.0);
    for (double tau : {6.0, 8.0, 12.0, 20.0}) {
        const double c = ascent_cost_limit(p, 1.0, 1.0, tau);
        CHECK(c < prev);
        CHECK(c > theta);
        prev = c;
    }
    CHECK_THAT(ascent_cost_limit(p, 1.0, 1.0, 30.0), WithinAbs(theta, 1e-8));
    // beta = 0: the climb has no spatial part and lambda = 0
    const double mu0 = std::sqrt(5.0);
    CHECK_THAT(ascent_cost_limit(p, 0.0, 1.0, 2.0), WithinAbs(0.25 + mu0 / std::tanh(2 * mu0) / 20.0, 1e-14));
}
