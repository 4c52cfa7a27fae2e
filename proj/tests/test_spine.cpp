#include "branchlab/error.hpp"
#include "branchlab/martingale.hpp"
#include "branchlab/numerics.hpp"
#include "branchlab/parallel.hpp"
#include "branchlab/spine.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace branchlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SpineConfig spine_only(std::uint64_t seed = 1)
{
    SpineConfig c;
    c.sim.h_max = 0.01;
    c.sim.c_step = 0.01;
    c.sim.seed = seed;
    c.simulate_subtrees = false;
    return c;
}

}  // namespace

TEST_CASE("closed-form spine birth count", "[spine]")
{
    const auto p = params_p0();
    const double lbar = delta_gamma_kappa(p, 1.0, 1.0).argmin_lambda;
    CHECK_THAT(expected_spine_births(p, lbar, 0.0, 1.0), WithinAbs(59.749389, 1e-6));
    const auto yule = validate_params(10.0, 1.0, 0.0, 1.5);
    CHECK_THAT(expected_spine_births(yule, -0.3, 0.7, 2.0), WithinAbs(6.0, 1e-12));
}

TEST_CASE("spine births are Poisson when r = 0", "[spine]")
{
    const auto p = validate_params(10.0, 1.0, 0.0, 1.0);
    const auto cfg = spine_only(5);
    const auto n = parallel_map(20000, [&](std::size_t i) {
        return static_cast<double>(run_spine(p, -0.3, {}, 1.5, cfg, i).n_tau);
    });
    const auto e = summarize(n, 5);
    CHECK(within_se(e, 3.0));
    double var = 0.0;
    for (double v : n)
        var += (v - e.mean) * (v - e.mean);
    var /= static_cast<double>(n.size() - 1);
    CHECK_THAT(var / e.mean, WithinAbs(1.0, 0.05));
}

TEST_CASE("spine type follows the outward OU law", "[spine]")
{
    const auto p = params_p0();
    const double lambda = -0.3, tau = 0.5;
    const double mu = mu_lambda(p, lambda);
    const double sd = std::sqrt(p.theta * std::expm1(2.0 * mu * tau) / (2.0 * mu));
    const auto cfg = spine_only(8);
    auto eta = parallel_map(20000, [&](std::size_t i) { return run_spine(p, lambda, {}, tau, cfg, i).spine_path.back().eta; });
    CHECK(ks_test(eta, [sd](double y) { return normal_cdf(y / sd); }).p_value > 0.01);
}

TEST_CASE("spine position drifts at lambda a per unit of integrated type", "[spine]")
{
    const auto p = params_p0();
    const double lambda = -0.3;
    const auto cfg = spine_only(9);
    const auto runs = parallel_map(4000, [&](std::size_t i) { return run_spine(p, lambda, {}, 0.5, cfg, i); });
    std::vector<double> z;
    for (const auto& r : runs)
        z.push_back((r.spine_path.back().xi - lambda * r.int_a) / std::sqrt(r.int_a));
    CHECK(ks_test(z, normal_cdf).p_value > 0.01);
}

TEST_CASE("spine runs are deterministic and keep the spine label", "[spine]")
{
    const auto p = params_p0();
    SpineConfig cfg = spine_only(3);
    cfg.simulate_subtrees = true;
    cfg.sim.snapshot_times = {0.1, 0.2};
    const auto a = run_spine(p, -0.3, {}, 0.2, cfg, 4);
    const auto b = run_spine(p, -0.3, {}, 0.2, cfg, 4);
    REQUIRE(a.tree.size() == b.tree.size());
    REQUIRE(a.tree.back().particles.size() == b.tree.back().particles.size());
    for (std::size_t i = 0; i < a.tree.back().particles.size(); ++i)
        CHECK(a.tree.back().particles[i].x == b.tree.back().particles[i].x);
    CHECK(a.spine_label.size() == a.n_tau);
    bool found = false;
    for (const auto& q : a.tree.back().particles)
        if (q.label == a.spine_label) {
            found = true;
            CHECK(q.x == a.spine_path.back().xi);
            CHECK(q.y == a.spine_path.back().eta);
        }
    CHECK(found);
    CHECK(a.tree.back().particles.size() >= a.n_tau + 1);
}

TEST_CASE("zeta tilde", "[spine]")
{
    const auto p = params_p0();
    const auto s = spectral(p, -0.3);
    CHECK_THAT(zeta_tilde(p, -0.3, 1.0, 0.5, 0, 0.0), WithinAbs(s.psi_plus * 0.25 - 0.3, 1e-15));
    CHECK_THAT(zeta_tilde(p, -0.3, 1.0, 0.5, 3, 0.2) - zeta_tilde(p, -0.3, 1.0, 0.5, 0, 0.2),
               WithinAbs(3.0 * std::log(2.0), 1e-14));

    // Short horizon: by t = 0.5 exp(psi_plus y^2) has no second moment.
    SimConfig cfg;
    cfg.h_max = 0.01;
    cfg.c_step = 0.01;
    const auto w = parallel_map(20000, [&](std::size_t i) {
        Stream rng(replica_key(31, i));
        return std::exp(tagged_line_log_zeta(p, -0.3, {}, 0.1, cfg, rng) - zeta_tilde(p, -0.3, 0.0, 0.0, 0, 0.0));
    });
    CHECK(within_se(summarize(w, 31), 1.0));
}

TEST_CASE("importance weights of the sure event average to one", "[spine]")
{
    const auto p = params_p0();
    SpineConfig cfg = spine_only(12);
    cfg.simulate_subtrees = true;
    const auto est = importance_estimate(p, -0.3, [](auto) { return true; }, 0.25, {}, 4000, cfg);
    CHECK(within_se(est.result, 1.0));
    CHECK(est.result.discarded == 0);
    CHECK_FALSE(est.result.flagged);
    CHECK(est.log_weight_min <= est.log_weight_median);
    CHECK(est.log_weight_median <= est.log_weight_max);
}

TEST_CASE("spine decomposition", "[spine]")
{
    const auto p = params_p0();
    SpineRun run;
    run.spine_path = {{0.0, 0.0, 0.0, false}, {0.3, -0.2, 0.4, false}};
    const auto d = spine_decomposition_value(run, p, -0.3);
    CHECK(d.sum_term.is_neg_inf());
    const auto s = spectral(p, -0.3);
    CHECK_THAT(d.spine_term.value(), WithinAbs(s.psi_plus * 0.16 + 0.06 - s.e_plus * 0.3, 1e-15));

    run.births = {{0.1, 0.5, 1.0, "2", 0, 0}};
    CHECK_THAT(spine_decomposition_value(run, p, -0.3).sum_term.value(),
               WithinAbs(s.psi_plus - 0.15 - s.e_plus * 0.1, 1e-15));
}

TEST_CASE("short climb indicator", "[spine]")
{
    const auto p = params_p0();
    const ShortClimbSpec spec{0.1, 0.1, 100.0, 1.0, 1.0};
    const auto ascent = short_climb_paths(p, spec);
    REQUIRE(ascent.tau > 0.0);
    const std::size_t steps = static_cast<std::size_t>(std::ceil(ascent.tau * 64.0));
    std::vector<PopulationSnapshot> grid;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double s = ascent.tau * static_cast<double>(k) / static_cast<double>(steps);
        grid.push_back({s, {{k > 0 ? "1" : "", ascent.x_path(s).value, ascent.y_path(s).value, 0.0},
                            {k > 0 ? "2" : "", 0.0, 0.0, 0.0}},
                        false});
        if (k == 0)
            grid.back().particles.pop_back();
    }
    CHECK(short_climb_indicator(grid, spec, p));

    // a tree that stays home misses the climb unless the tube is unbounded
    for (auto& g : grid)
        g.particles = {{"", 0.0, 0.0, 0.0}};
    CHECK_FALSE(short_climb_indicator(grid, spec, p));
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(short_climb_indicator(grid, {inf, inf, 100.0, 1.0, 1.0}, p));

    std::vector<PopulationSnapshot> coarse{grid.front(), grid.back()};
    CHECK_THROWS_AS(short_climb_indicator(coarse, spec, p), Error);
    // at t = 9 the clock gives an empty ascent window
    CHECK_THROWS_AS(short_climb_paths(p, {0.1, 0.1, 9.0, 1.0, 1.0}), Error);
}
