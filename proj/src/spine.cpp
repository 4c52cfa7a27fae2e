#include "branchlab/spine.hpp"

#include "branchlab/error.hpp"
#include "branchlab/martingale.hpp"
#include "branchlab/numerics.hpp"
#include "branchlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace branchlab {

SpineRun run_spine(const ModelParams& p, double lambda, State start, double tau, const SpineConfig& cfg,
                   std::uint64_t replica)
{
    if (!(lambda < 0.0))
        throw Error(Errc::LambdaOutOfRange, "spine needs lambda in (lambda_min, 0)");
    SimConfig sim = cfg.sim;
    sim.horizon = tau;
    std::vector<double> times = sim.snapshot_times;
    if (times.empty() || times.back() < tau)
        times.push_back(tau);
    sim.snapshot_times = times;
    sim.validate();

    const double mu = mu_lambda(p, lambda);
    SpineRun out;
    out.lambda = lambda;
    out.tau = tau;

    Stream rng(replica_key(sim.seed, replica));
    double s = 0.0, xi = start.x, eta = start.y;
    out.spine_path.push_back({0.0, xi, eta, false});
    std::vector<State> spine_at;
    std::vector<std::string> label_at;

    for (double T : times) {
        while (s < T) {
            double h = adaptive_step(p, eta, sim.h_max, sim.c_step, 2.0);
            const bool last = h >= T - s;
            if (last)
                h = T - s;
            const double grow = std::exp(mu * h);
            const double eta1 = eta * grow + std::sqrt(p.theta * std::expm1(2.0 * mu * h) / (2.0 * mu)) * rng.normal();
            const double ysq = 0.5 * (eta * eta + eta1 * eta1);
            const double v = p.a * h * ysq;
            const double xi0 = xi;
            xi += lambda * v + std::sqrt(v) * rng.normal();
            const double rate2 = 2.0 * (p.rho + p.r * ysq);
            const bool branched = rng.uniform() < -std::expm1(-h * rate2);
            out.int_a += v;
            out.int_two_r += h * rate2;
            const double s1 = last ? T : s + h;
            bool birth_at_end = false;
            if (branched) {
                const double u = conditioned_event_time(rate2, h, rng);
                const State at = bridge_point({xi0, eta}, {xi, eta1}, u, h, -mu, -0.5 * p.theta / mu, v, rng);
                const double sb = u >= h ? s1 : s + u;
                const unsigned keep = rng.uniform() < 0.5 ? 1u : 2u;
                const unsigned leave = 3u - keep;
                out.births.push_back(
                    {sb, at.x, at.y, out.spine_label + static_cast<char>('0' + leave), rng.child(leave).key()});
                rng = rng.child(keep);
                out.spine_label += static_cast<char>('0' + keep);
                out.spine_birth_times.push_back(sb);
                if (sb < s1)
                    out.spine_path.push_back({sb, at.x, at.y, true});
                else
                    birth_at_end = true;
            }
            eta = eta1;
            s = s1;
            out.spine_path.push_back({s, xi, eta, birth_at_end});
        }
        spine_at.push_back({xi, eta});
        label_at.push_back(out.spine_label);
    }
    out.n_tau = out.births.size();

    out.tree.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        out.tree[k].time = times[k];
        out.tree[k].particles.push_back({label_at[k], spine_at[k].x, spine_at[k].y, 0.0});
    }
    if (!cfg.simulate_subtrees)
        return out;

    std::vector<bool> truncated(times.size(), false);
    // Subtrees share one cap. Once it is spent, every snapshot that would
    // hold a subtree not yet grown counts as truncated.
    auto truncate_from = [&](double t0) {
        for (std::size_t k = 0; k < times.size(); ++k)
            if (times[k] >= t0)
                truncated[k] = true;
    };
    std::size_t used = 1;
    for (std::size_t i = 0; i < out.births.size(); ++i) {
        auto& b = out.births[i];
        if (used >= sim.cap) {
            truncate_from(b.time);
            break;
        }
        std::vector<double> after;
        std::size_t first = 0;
        while (first < times.size() && times[first] < b.time)
            ++first;
        after.assign(times.begin() + static_cast<std::ptrdiff_t>(first), times.end());
        const Particle root{b.subtree_root, b.xi, b.eta, b.time};
        SimConfig budget = sim;
        budget.cap = sim.cap - used;
        auto sub = run_subtree(p, root, b.subtree_key, after, budget);
        for (std::size_t j = 0; j < sub.size(); ++j) {
            auto& dst = out.tree[first + j];
            if (sub[j].truncated) {
                truncated[first + j] = true;
                continue;
            }
            dst.particles.insert(dst.particles.end(), sub[j].particles.begin(), sub[j].particles.end());
        }
        b.subtree_size = sub.back().truncated ? 0 : sub.back().particles.size();
        if (sub.back().truncated) {
            if (i + 1 < out.births.size())
                truncate_from(out.births[i + 1].time);
            break;
        }
        used += b.subtree_size;
    }

    bool hit = false;
    for (std::size_t k = 0; k < times.size(); ++k) {
        hit = hit || truncated[k] || out.tree[k].particles.size() > sim.cap;
        if (hit) {
            out.tree[k].truncated = true;
            out.tree[k].particles.clear();
            continue;
        }
        std::sort(out.tree[k].particles.begin(), out.tree[k].particles.end(),
                  [](const Particle& a, const Particle& b) { return a.label < b.label; });
    }
    out.truncated = hit;
    return out;
}

double expected_spine_births(const ModelParams& p, double lambda, double y0, double tau)
{
    const double mu = mu_lambda(p, lambda);
    const double g = std::expm1(2.0 * mu * tau) / (2.0 * mu);
    return 2.0 * p.r * (y0 * y0 * g + p.theta / (2.0 * mu) * (g - tau)) + 2.0 * p.rho * tau;
}

double zeta_tilde(const ModelParams& p, double lambda, double xi, double eta, std::size_t n, double t)
{
    const auto s = spectral(p, lambda);
    return s.psi_plus * eta * eta + static_cast<double>(n) * std::numbers::ln2 + lambda * xi - s.e_plus * t;
}

double tagged_line_log_zeta(const ModelParams& p, double lambda, State start, double t, const SimConfig& cfg,
                            Stream& rng)
{
    double s = 0.0;
    std::size_t n = 0;
    State st = start;
    while (s < t) {
        double h = adaptive_step(p, st.y, cfg.h_max, cfg.c_step);
        const bool last = h >= t - s;
        if (last)
            h = t - s;
        const auto step = advance_particle(p, st, h, cfg.h_max, cfg.c_step, rng);
        st = {step.x, step.y};
        s = last ? t : s + h;
        if (step.branched) {
            ++n;
            rng = rng.child(rng.uniform() < 0.5 ? 1u : 2u);
        }
    }
    return zeta_tilde(p, lambda, st.x, st.y, n, t);
}

ISEstimate importance_estimate(const ModelParams& p, double lambda, const TreeEvent& event, double tau, State start,
                               std::size_t replicas, const SpineConfig& cfg)
{
    const auto sq = spectral(p, lambda);
    const double log_z0 = sq.psi_plus * start.y * start.y + lambda * start.x;
    struct Outcome {
        bool kept = false;
        bool hit = false;
        double log_w = 0.0;
    };
    auto outcomes = parallel_map(replicas, [&](std::size_t i) {
        const auto run = run_spine(p, lambda, start, tau, cfg, i);
        Outcome o;
        if (run.truncated)
            return o;
        o.kept = true;
        o.log_w = log_z0 - z_value(run.tree.back(), p, lambda, Sign::plus);
        o.hit = event(run.tree);
        return o;
    });

    std::vector<double> values, log_w;
    std::size_t discarded = 0;
    for (const auto& o : outcomes) {
        if (!o.kept) {
            ++discarded;
            continue;
        }
        log_w.push_back(o.log_w);
        values.push_back(o.hit ? std::exp(o.log_w) : 0.0);
    }
    ISEstimate out;
    out.result = summarize(values, cfg.sim.seed);
    out.result.discarded = discarded;
    out.result.flagged = replicas > 0 && static_cast<double>(discarded) > 0.01 * static_cast<double>(replicas);
    if (!log_w.empty()) {
        out.log_weight_min = *std::min_element(log_w.begin(), log_w.end());
        out.log_weight_max = *std::max_element(log_w.begin(), log_w.end());
        out.log_weight_median = median(log_w);
    }
    return out;
}

OptimalAscent short_climb_paths(const ModelParams& p, const ShortClimbSpec& spec)
{
    if (!(spec.epsilon > 0.0) || !(spec.delta > 0.0))
        throw Error(Errc::DomainError, "tube widths must be positive");
    const double lam = theta_cost(p, spec.beta, spec.kappa).lambda_bar_ascent;
    const double tau = tau_of_t(p, lam, spec.t);
    return optimal_paths(p, AscentSpec{spec.beta, spec.kappa, spec.t}, lam, tau);
}

bool short_climb_indicator(std::span<const PopulationSnapshot> grid, const ShortClimbSpec& spec,
                           const ModelParams& p)
{
    const auto ascent = short_climb_paths(p, spec);
    const double tau = ascent.tau;
    constexpr double max_spacing = 1.0 / 64.0;
    if (grid.empty() || grid.front().time != 0.0 || std::abs(grid.back().time - tau) > 1e-12)
        throw Error(Errc::GridTooCoarse, "grid must run from 0 to tau");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (grid[k].time - grid[k - 1].time > max_spacing * (1.0 + 1e-9))
            throw Error(Errc::GridTooCoarse, "grid spacing exceeds 1/64");

    const double ytol = spec.epsilon * std::sqrt(spec.t);
    const double xtol = spec.delta * spec.t;
    auto inside = [&](const Particle& q, double s) {
        const double sc = std::min(s, tau);
        return std::abs(q.y - ascent.y_path(sc).value) < ytol && std::abs(q.x - ascent.x_path(sc).value) < xtol;
    };

    std::unordered_set<std::string> alive;
    for (const auto& q : grid.front().particles)
        if (inside(q, 0.0))
            alive.insert(q.label);
    for (std::size_t k = 1; k < grid.size() && !alive.empty(); ++k) {
        if (grid[k].truncated)
            throw Error(Errc::CapExceeded, "short-climb grid snapshot is truncated");
        std::unordered_set<std::string> next;
        for (const auto& q : grid[k].particles) {
            if (!inside(q, grid[k].time))
                continue;
            for (std::size_t len = q.label.size() + 1; len-- > 0;) {
                if (alive.count(q.label.substr(0, len))) {
                    next.insert(q.label);
                    break;
                }
            }
        }
        alive = std::move(next);
    }
    return !alive.empty();
}

SpineDecomposition spine_decomposition_value(const SpineRun& run, const ModelParams& p, double lambda)
{
    const auto s = spectral(p, lambda);
    ExtReal sum = ExtReal::neg_inf();
    for (const auto& b : run.births)
        sum = log_add(sum, ExtReal(s.psi_plus * b.eta * b.eta + lambda * b.xi - s.e_plus * b.time));
    const auto& end = run.spine_path.back();
    return {sum, ExtReal(s.psi_plus * end.eta * end.eta + lambda * end.xi - s.e_plus * end.s)};
}

}  // namespace branchlab
