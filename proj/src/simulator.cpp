#include "branchlab/simulator.hpp"

#include "branchlab/error.hpp"
#include "branchlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace branchlab {

std::string label_text(const std::string& word) { return "u" + word; }

bool is_prefix(const std::string& ancestor, const std::string& word)
{
    return word.size() >= ancestor.size() && word.compare(0, ancestor.size(), ancestor) == 0;
}

void SimConfig::validate() const
{
    if (!(h_max > 0.0 && h_max <= 0.5))
        throw Error(Errc::InvalidConfig, "h_max must lie in (0, 0.5]");
    if (!(c_step > 0.0 && c_step <= 0.2))
        throw Error(Errc::InvalidConfig, "c_step must lie in (0, 0.2]");
    if (cap < 1)
        throw Error(Errc::InvalidConfig, "cap must be at least 1");
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw Error(Errc::InvalidConfig, "horizon must be finite and nonnegative");
    double prev = -1.0;
    for (double t : snapshot_times) {
        if (!(t >= 0.0 && t <= horizon) || t <= prev)
            throw Error(Errc::InvalidConfig, "snapshot times must be strictly increasing within [0, horizon]");
        prev = t;
    }
}

std::vector<double> SimConfig::resolved_snapshot_times() const
{
    if (snapshot_times.empty())
        return {horizon};
    return snapshot_times;
}

double adaptive_step(const ModelParams& p, double y, double h_max, double c_step, double rate_multiplier)
{
    const double rate = rate_multiplier * (p.rho + p.r * y * y);
    return rate > 0.0 ? std::min(h_max, c_step / rate) : h_max;
}

State bridge_point(State from, State to, double u, double h, double k, double var_inf, double x_var, Stream& rng)
{
    const double vu = -std::expm1(-2.0 * k * u) * var_inf;
    const double vh = -std::expm1(-2.0 * k * h) * var_inf;
    const double cov = std::exp(-k * (h - u)) * vu;
    const double beta = vh > 0.0 ? cov / vh : 0.0;
    const double y = from.y * std::exp(-k * u) + beta * (to.y - from.y * std::exp(-k * h)) +
                     std::sqrt(std::max(0.0, vu - beta * cov)) * rng.normal();
    const double f = h > 0.0 ? u / h : 0.0;
    const double x = from.x + f * (to.x - from.x) + std::sqrt(std::max(0.0, f * (1.0 - f) * x_var)) * rng.normal();
    return {x, y};
}

double conditioned_event_time(double rate, double h, Stream& rng)
{
    const double q = -std::expm1(-h * rate);
    return std::min(h, -std::log1p(-rng.uniform() * q) / rate);
}

namespace {

constexpr double kSlack = 1.0 + 1e-12;

StepResult step_unchecked(const ModelParams& p, State s, double h, Stream& rng)
{
    const double decay = std::exp(-0.5 * p.theta * h);
    const double sd = std::sqrt(-std::expm1(-p.theta * h));
    const double y1 = s.y * decay + sd * rng.normal();
    const double ysq = 0.5 * (s.y * s.y + y1 * y1);
    const double v = p.a * h * ysq;
    const double x1 = s.x + std::sqrt(v) * rng.normal();
    const double rate = p.rho + p.r * ysq;
    const bool branched = rng.uniform() < -std::expm1(-h * rate);
    if (!branched)
        return {x1, y1, false, h, {x1, y1}};
    const double u = conditioned_event_time(rate, h, rng);
    return {x1, y1, true, u, bridge_point(s, {x1, y1}, u, h, 0.5 * p.theta, 1.0, v, rng)};
}

struct Live {
    Particle part;
    Stream rng;
    double now;
};

// Advances every particle in `pending` to time T, appending them to `done`.
// Returns false as soon as the live population exceeds the cap.
bool evolve_epoch(const ModelParams& p, const SimConfig& cfg, std::vector<Live>& pending, double T,
                  std::vector<Live>& done, std::size_t& live_count)
{
    while (!pending.empty()) {
        Live cur = std::move(pending.back());
        pending.pop_back();
        while (cur.now < T) {
            double h = adaptive_step(p, cur.part.y, cfg.h_max, cfg.c_step);
            const bool last = h >= T - cur.now;
            if (last)
                h = T - cur.now;
            const auto step = step_unchecked(p, {cur.part.x, cur.part.y}, h, cur.rng);
            if (!step.branched) {
                cur.now = last ? T : cur.now + h;
                cur.part.x = step.x;
                cur.part.y = step.y;
                continue;
            }
            if (++live_count > cfg.cap)
                return false;
            const double born = step.branch_offset >= h ? (last ? T : cur.now + h) : cur.now + step.branch_offset;
            const State at = step.at_branch;
            Live second{{cur.part.label + '2', at.x, at.y, born}, cur.rng.child(2), born};
            Live first{{cur.part.label + '1', at.x, at.y, born}, cur.rng.child(1), born};
            pending.push_back(std::move(second));
            cur = std::move(first);
        }
        done.push_back(std::move(cur));
    }
    return true;
}

std::vector<PopulationSnapshot> run_from(const ModelParams& p, Live root, std::span<const double> times,
                                         const SimConfig& cfg)
{
    std::vector<PopulationSnapshot> out;
    out.reserve(times.size());
    std::vector<Live> current;
    current.push_back(std::move(root));
    std::size_t live_count = 1;
    bool truncated = false;

    for (double T : times) {
        if (truncated) {
            out.push_back({T, {}, true});
            continue;
        }
        std::vector<Live> next;
        next.reserve(current.size());
        if (!evolve_epoch(p, cfg, current, T, next, live_count)) {
            truncated = true;
            current.clear();
            out.push_back({T, {}, true});
            continue;
        }
        std::sort(next.begin(), next.end(), [](const Live& a, const Live& b) { return a.part.label < b.part.label; });
        PopulationSnapshot snap{T, {}, false};
        snap.particles.reserve(next.size());
        for (const auto& l : next)
            snap.particles.push_back(l.part);
        out.push_back(std::move(snap));
        current = std::move(next);
    }
    return out;
}

}  // namespace

StepResult advance_particle(const ModelParams& p, State state, double h, double h_max, double c_step, Stream& rng)
{
    const double rate = p.rho + p.r * state.y * state.y;
    if (!(h >= 0.0) || h > h_max * kSlack || h * rate > c_step * kSlack) {
        std::ostringstream os;
        os << "h=" << h << " violates h <= " << h_max << " and h*R(y) <= " << c_step;
        throw Error(Errc::StepTooLarge, os.str());
    }
    return step_unchecked(p, state, h, rng);
}

std::vector<PopulationSnapshot> run(const ModelParams& p, State start, const SimConfig& cfg, std::uint64_t replica)
{
    cfg.validate();
    const auto times = cfg.resolved_snapshot_times();
    Live root{{"", start.x, start.y, 0.0}, Stream(replica_key(cfg.seed, replica)), 0.0};
    return run_from(p, std::move(root), times, cfg);
}

std::vector<PopulationSnapshot> run_subtree(const ModelParams& p, const Particle& root, std::uint64_t key,
                                            std::span<const double> snapshot_times, const SimConfig& cfg)
{
    for (double t : snapshot_times)
        if (t < root.born_at)
            throw Error(Errc::InvalidConfig, "subtree snapshot precedes the root's birth");
    Live live{root, Stream(key), root.born_at};
    return run_from(p, std::move(live), snapshot_times, cfg);
}

std::size_t count_region(const PopulationSnapshot& snap, double gamma, std::optional<double> kappa,
                         std::optional<std::pair<double, double>> type_window)
{
    if (kappa && type_window)
        throw Error(Errc::ModeConflict, "kappa and type window are mutually exclusive");
    const double t = snap.time;
    const double x_cut = -gamma * t;
    std::size_t n = 0;
    for (const auto& q : snap.particles) {
        if (!(q.x <= x_cut))
            continue;
        if (kappa && !(q.y >= *kappa * std::sqrt(t)))
            continue;
        if (type_window && !(q.y >= type_window->first && q.y <= type_window->second))
            continue;
        ++n;
    }
    return n;
}

Extremes extremes(const PopulationSnapshot& snap)
{
    if (snap.particles.empty())
        throw Error(Errc::EmptyPopulation, "extremes of an empty snapshot");
    Extremes e{snap.particles.front().x, snap.particles.front().x, 0.0};
    for (const auto& q : snap.particles) {
        e.min_x = std::min(e.min_x, q.x);
        e.max_x = std::max(e.max_x, q.x);
        e.max_abs_y = std::max(e.max_abs_y, std::abs(q.y));
    }
    return e;
}

EstimatorResult mckean_product(const ModelParams& p, const PointFn& f, double t, State start,
                               std::size_t replicas, const SimConfig& cfg)
{
    SimConfig c = cfg;
    c.horizon = t;
    c.snapshot_times = {t};
    c.validate();
    auto values = parallel_map(replicas, [&](std::size_t i) {
        const auto snaps = run(p, start, c, i);
        const auto& snap = snaps.back();
        if (snap.truncated)
            throw Error(Errc::CapExceeded, "population cap hit in McKean estimator");
        double prod = 1.0;
        for (const auto& q : snap.particles) {
            const double v = f(q.x, q.y);
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(Errc::RangeViolation, "McKean test function left [0, 1]");
            prod *= v;
        }
        return prod;
    });
    return summarize(values, cfg.seed);
}

}  // namespace branchlab
