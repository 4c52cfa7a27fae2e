#include "branchlab/verify.hpp"

#include "branchlab/birthdeath.hpp"
#include "branchlab/error.hpp"
#include "branchlab/martingale.hpp"
#include "branchlab/numerics.hpp"
#include "branchlab/oracle.hpp"
#include "branchlab/parallel.hpp"
#include "branchlab/paths.hpp"
#include "branchlab/spine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace branchlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6)
{
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::string fmt_est(const EstimatorResult& e)
{
    return fmt(e.mean) + " +- " + fmt(e.std_error, 3) + " (n=" + std::to_string(e.replicas) + ")";
}

const std::map<int, std::string>& criterion_titles()
{
    static const std::map<int, std::string> titles{
        {1, "closed-form identity battery"},
        {2, "variational optimizers reproduce closed forms"},
        {3, "exact wave speed"},
        {4, "finite-horizon optimizer convergence"},
        {5, "path-functional consistency"},
        {6, "many-to-one equivalence"},
        {7, "expected population"},
        {8, "martingale checks"},
        {9, "decay of the plus martingale"},
        {10, "birth-death outcome law"},
        {11, "spine and importance sampling"},
        {12, "growth-rate trends"},
    };
    return titles;
}

class Ctx {
public:
    Ctx(SuiteReport& report, const SuiteOptions& opt, std::uint64_t default_seed)
        : report_(report), opt_(opt), seed_(opt.seed.value_or(default_seed))
    {
    }

    std::uint64_t seed(std::uint64_t offset = 0) const { return seed_ + offset; }

    std::size_t replicas(std::size_t documented)
    {
        if (!opt_.replicas)
            return documented;
        if (*opt_.replicas < documented)
            report_.underpowered = true;
        return std::max<std::size_t>(*opt_.replicas, 2);
    }

    void add(int criterion, std::string name, double measured, double threshold, bool passed, std::string detail = "")
    {
        report_.checks.push_back({criterion, std::move(name), measured, threshold, passed, std::move(detail)});
    }

    // Runs fn; an exception becomes a failed check carrying the message.
    void guarded(int criterion, const std::string& name, const std::function<void()>& fn)
    {
        try {
            fn();
        } catch (const std::exception& e) {
            add(criterion, name, std::nan(""), std::nan(""), false, e.what());
        }
    }

    void finish(int criterion)
    {
        if (!opt_.progress)
            return;
        for (const auto& o : report_.by_criterion())
            if (o.criterion == criterion)
                *opt_.progress << criterion_line(o) << std::endl;
    }

private:
    SuiteReport& report_;
    const SuiteOptions& opt_;
    std::uint64_t seed_;
};

std::vector<ModelParams> identity_param_sets()
{
    return {params_p0(), validate_params(12.0, 0.5, 1.0, 0.3), validate_params(20.0, 2.0, 0.5, 2.0)};
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

const std::vector<double> kGammaGrid = linspace(0.25, 2.25, 9);
const std::vector<double> kKappaGrid = linspace(0.0, 2.0, 5);

double theta_or_zero(const ModelParams& p, double beta, double kappa)
{
    return (beta == 0.0 && kappa == 0.0) ? 0.0 : theta_cost(p, beta, kappa).theta_bk;
}

void criterion1(Ctx& c)
{
    const auto t0 = Clock::now();
    double psi = 0, e = 0, red = 0, d0 = 0, th0 = 0, split = 0, leg = 0;
    for (const auto& p : identity_param_sets()) {
        const double lm = lambda_min(p);
        for (int i = 0; i <= 20; ++i) {
            const auto s = spectral(p, lm * (20 - i) / 21.0);
            psi = std::max({psi, std::abs(s.psi_minus + s.psi_plus - 0.5),
                            std::abs(s.psi_plus - s.psi_minus - s.mu / p.theta)});
            e = std::max({e, std::abs(s.e_minus - p.rho - p.theta * s.psi_minus),
                          std::abs(s.e_plus - p.rho - p.theta * s.psi_plus)});
        }
        for (double g : kGammaGrid)
            red = std::max(red, std::abs(delta_gamma_kappa(p, g, 0.0).value.value() - delta_gamma(p, g).value.value()));
        d0 = std::max(d0, std::abs(delta_gamma(p, 0.0).value.value() - spectral(p, 0.0).e_minus));
        for (double k : {0.5, 1.0, 1.5, 2.0})
            th0 = std::max(th0, std::abs(theta_cost(p, 0.0, k).theta_bk - k * k * spectral(p, 0.0).psi_plus));
        for (double g : kGammaGrid)
            for (double k : kKappaGrid) {
                const auto sp = optimal_split(p, g, k);
                const double lhs = delta_gamma(p, sp.alpha_bar).value.value() - theta_or_zero(p, sp.beta_bar, k);
                split = std::max(split, std::abs(lhs - delta_gamma_kappa(p, g, k).value.value()));
            }
        for (double g : linspace(0.1, 4.0, 40)) {
            const double l = legendre_pair(p, g, LegendreDirection::gamma_to_lambda);
            leg = std::max(leg, std::abs(legendre_pair(p, l, LegendreDirection::lambda_to_gamma) - g));
        }
        for (double l : linspace(lm + 0.05, -0.05, 40)) {
            const double g = legendre_pair(p, l, LegendreDirection::lambda_to_gamma);
            leg = std::max(leg, std::abs(legendre_pair(p, g, LegendreDirection::gamma_to_lambda) - l));
        }
    }
    const double tol = 1e-9;
    c.add(1, "psi- + psi+ = 1/2 and psi+ - psi- = mu/theta", psi, tol, psi <= tol);
    c.add(1, "E = rho + theta psi", e, tol, e <= tol);
    c.add(1, "Delta(gamma,0) = Delta(gamma)", red, tol, red <= tol);
    c.add(1, "Delta(0) = E-(0)", d0, tol, d0 <= tol);
    c.add(1, "Theta(0,kappa) = kappa^2 psi+(0)", th0, tol, th0 <= tol);
    c.add(1, "split identity on 9x5 grid", split, tol, split <= tol);
    c.add(1, "Legendre round trips", leg, tol, leg <= tol);
    const double dt = seconds_since(t0);
    c.add(1, "runtime (s)", dt, 1.0, dt < 1.0);
}

void criterion2(Ctx& c)
{
    const auto t0 = Clock::now();
    double dv = 0, da = 0, kv = 0, ka = 0, tv = 0, ta = 0, dual = 0;
    for (const auto& p : identity_param_sets()) {
        for (double g : kGammaGrid) {
            const auto closed = delta_gamma(p, g);
            const auto num = numeric::delta_gamma(p, g);
            dv = std::max(dv, std::abs(num.value - closed.value.value()));
            da = std::max(da, std::abs(num.arg - closed.argmin_lambda));
            for (double k : kKappaGrid) {
                const auto ck = delta_gamma_kappa(p, g, k);
                const auto nk = numeric::delta_gamma_kappa(p, g, k);
                kv = std::max(kv, std::abs(nk.value - ck.value.value()));
                ka = std::max(ka, std::abs(nk.arg - ck.argmin_lambda));
                const auto ct = theta_cost(p, g, k);
                const auto nt = numeric::theta_cost(p, g, k);
                tv = std::max(tv, std::abs(nt.value - ct.theta_bk));
                ta = std::max(ta, std::abs(nt.arg - ct.lambda_bar_ascent));
            }
        }
        for (double l : linspace(lambda_min(p) + 0.05, -0.05, 20))
            dual = std::max(dual, std::abs(numeric::e_minus_dual(p, l).value - spectral(p, l).e_minus));
    }
    c.add(2, "numeric Delta(gamma) value", dv, 1e-7, dv <= 1e-7);
    c.add(2, "numeric Delta(gamma) argmin", da, 1e-6, da <= 1e-6);
    c.add(2, "numeric Delta(gamma,kappa) value", kv, 1e-7, kv <= 1e-7);
    c.add(2, "numeric Delta(gamma,kappa) argmin", ka, 1e-6, ka <= 1e-6);
    c.add(2, "numeric Theta(beta,kappa) value", tv, 1e-7, tv <= 1e-7);
    c.add(2, "numeric Theta(beta,kappa) argmax", ta, 1e-6, ta <= 1e-6);
    c.add(2, "Legendre dual sup gives E-(lambda)", dual, 1e-7, dual <= 1e-7);
    const double dt = seconds_since(t0);
    c.add(2, "runtime (s)", dt, 5.0, dt < 5.0);
}

void criterion3(Ctx& c)
{
    const auto p = params_p0();
    const auto w = wave_speed(p);
    const double dc = std::abs(w.c_tilde - std::sqrt(22.0));
    const double dl = std::abs(w.lambda_tilde + std::sqrt(22.0) / 7.0);
    const double dn = std::abs(numeric::min_wave_speed(p).value - w.c_tilde);
    c.add(3, "c_tilde(P0) = sqrt(22)", dc, 1e-12, dc <= 1e-12);
    c.add(3, "c_tilde = min over lambda of c-", dn, 1e-8, dn <= 1e-8);
    c.add(3, "lambda_tilde(P0) = -sqrt(22)/7", dl, 1e-12, dl <= 1e-12);
}

void criterion4(Ctx& c)
{
    const auto p = params_p0();
    const AscentSpec spec{1.0, 1.0, 1.0};
    const double target = -0.6984303;
    c.guarded(4, "|lambda_hat(6) - lambda_bar_ascent(1,1)|", [&] {
        const double l = lambda_hat(p, spec, 6.0);
        const double d = std::abs(l - target);
        c.add(4, "|lambda_hat(6) - lambda_bar_ascent(1,1)|", d, 1e-3, d <= 1e-3, "lambda_hat(6) = " + fmt(l, 10));
    });
    std::vector<double> values;
    std::string missing;
    for (double tau : {2.0, 4.0, 6.0, 8.0}) {
        try {
            values.push_back(lambda_hat(p, spec, tau));
        } catch (const Error& e) {
            if (e.code() != Errc::NoBracket)
                throw;
            missing += (missing.empty() ? "" : ", ") + fmt(tau);
        }
    }
    if (!missing.empty()) {
        c.add(4, "lambda_hat monotone over tau in {2,4,6,8}", std::nan(""), 0.0, false,
              "no root of the lambda_hat equation at tau = " + missing);
    } else {
        bool mono_up = true, mono_down = true;
        for (std::size_t i = 1; i < values.size(); ++i) {
            mono_up = mono_up && values[i] >= values[i - 1];
            mono_down = mono_down && values[i] <= values[i - 1];
        }
        c.add(4, "lambda_hat monotone over tau in {2,4,6,8}", 0.0, 0.0, mono_up || mono_down);
    }
}

// J along the pinned sinh pair for any lambda.
double pinned_pair_cost(const ModelParams& p, const AscentSpec& spec, double lambda, double tau)
{
    const double mu = mu_lambda(p, lambda);
    const double Y = optimal_y_square_integral(p, spec, lambda, tau);
    return spec.kappa * spec.kappa * spec.t * (0.25 + mu / std::tanh(mu * tau) / (2.0 * p.theta))
           + 0.5 * p.a * lambda * lambda * Y + spec.beta * spec.beta * spec.t * spec.t / (2.0 * p.a * Y) - p.rho * tau;
}

void criterion5(Ctx& c)
{
    const auto p = params_p0();
    const AscentSpec spec{1.0, 1.0, 100.0};
    for (double tau : {1.0, 2.0}) {
        const std::string at = " at tau=" + fmt(tau);
        c.guarded(5, "J quadrature vs closed form" + at, [&] {
            const double l = lambda_hat(p, spec, tau);
            const auto a = optimal_paths(p, spec, l, tau);
            const auto j = functional_J(p, a.x_path, a.y_path, tau, FunctionalMode::sup);
            const double rel = std::abs(j.j_value - a.cost) / std::abs(a.cost);
            c.add(5, "J quadrature vs closed form" + at, rel, 1e-5, rel <= 1e-5);
            const double gap = (j.l_value - j.j_value) / std::abs(j.j_value);
            c.add(5, "L = J(tau)" + at, gap, 1e-8, gap <= 1e-8, "argmax s = " + fmt(j.argmax_s));
        });
    }

    // Panel-doubling ratio on the pinned pair at lambda_bar_ascent, where the
    // exact value is known for every tau.
    const double lam = theta_cost(p, 1.0, 1.0).lambda_bar_ascent;
    double worst = std::numeric_limits<double>::infinity();
    std::string detail;
    for (double tau : {1.0, 2.0}) {
        const auto a = optimal_paths(p, spec, lam, tau);
        const double exact = pinned_pair_cost(p, spec, lam, tau);
        const double quad = functional_J(p, a.x_path, a.y_path, tau, FunctionalMode::at_s).j_value;
        const double rel = std::abs(quad - exact) / std::abs(exact);
        c.add(5, "J quadrature vs pinned-pair closed form at lambda_bar_ascent, tau=" + fmt(tau), rel, 1e-5,
              rel <= 1e-5);
        double prev = -1.0;
        for (std::size_t panels = 16; panels <= 1024; panels *= 2) {
            const double err = std::abs(functional_J(p, a.x_path, a.y_path, tau, FunctionalMode::at_s, panels).j_value - exact);
            if (prev > 0.0 && err > 1e-11 * std::abs(exact)) {
                worst = std::min(worst, prev / err);
                detail += "tau=" + fmt(tau) + " N=" + std::to_string(panels) + " ratio " + fmt(prev / err, 4) + "; ";
            }
            prev = err;
        }
    }
    c.add(5, "quadrature error ratio per panel doubling", worst, 8.0, worst >= 8.0, detail);
}

SimConfig sim_config(double horizon, std::vector<double> times, double h_max, double c_step, std::uint64_t seed,
                     std::size_t cap = 1'000'000)
{
    SimConfig cfg;
    cfg.h_max = h_max;
    cfg.c_step = c_step;
    cfg.cap = cap;
    cfg.horizon = horizon;
    cfg.snapshot_times = std::move(times);
    cfg.seed = seed;
    return cfg;
}

void criterion6(Ctx& c)
{
    const auto p = params_p0();
    const double t = 0.75;
    const std::size_t n = c.replicas(10000);
    const auto cfg = sim_config(t, {t}, 0.01, 0.002, c.seed());
    struct Fn {
        std::string name;
        BoundedFn f;
    };
    const std::vector<Fn> fns{
        {"f=1", {[](double, double) { return 1.0; }, 1.0}},
        {"f=1[-1,1](y)", {[](double, double y) { return (y >= -1.0 && y <= 1.0) ? 1.0 : 0.0; }, 1.0}},
        {"f=exp(-x^2-y^2)", {[](double x, double y) { return std::exp(-x * x - y * y); }, 1.0}},
    };
    auto sums = parallel_map(n, [&](std::size_t i) {
        const auto snaps = run(p, {0.0, 0.0}, cfg, i);
        if (snaps.back().truncated)
            throw Error(Errc::CapExceeded, "population cap hit");
        std::vector<double> s(fns.size(), 0.0);
        for (const auto& q : snaps.back().particles)
            for (std::size_t k = 0; k < fns.size(); ++k)
                s[k] += fns[k].f.f(q.x, q.y);
        return s;
    });
    for (std::size_t k = 0; k < fns.size(); ++k) {
        std::vector<double> col;
        for (const auto& s : sums)
            col.push_back(s[k]);
        const auto sim = summarize(col, cfg.seed);
        const auto m2o = many_to_one_expectation(p, fns[k].f, t, {0.0, 0.0}, n, {0.01, 0.005, c.seed(1)}).result;
        const auto tr = transformed_expectation(p, -0.3, fns[k].f, t, {0.0, 0.0}, n, {0.01, 0.005, c.seed(2)}).result;
        auto z = [](const EstimatorResult& a, const EstimatorResult& b) {
            return std::abs(a.mean - b.mean) / (3.0 * (a.std_error + b.std_error));
        };
        const double worst = std::max({z(sim, m2o), z(sim, tr), z(m2o, tr)});
        c.add(6, "pairwise 3-sigma overlap " + fns[k].name, worst, 1.0, worst <= 1.0,
              "simulator " + fmt_est(sim) + "; many-to-one " + fmt_est(m2o) + "; transformed " + fmt_est(tr));
    }
}

EstimatorResult population_mean(const ModelParams& p, double t, std::size_t n, std::uint64_t seed)
{
    const auto cfg = sim_config(t, {t}, 0.01, 0.001, seed);
    auto sizes = parallel_map(n, [&](std::size_t i) {
        const auto snaps = run(p, {0.0, 0.0}, cfg, i);
        if (snaps.back().truncated)
            throw Error(Errc::CapExceeded, "population cap hit");
        return static_cast<double>(snaps.back().particles.size());
    });
    return summarize(sizes, seed);
}

void criterion7(Ctx& c)
{
    const auto p = params_p0();
    const std::size_t n = c.replicas(10000);
    const double target = expected_population(p, 1.0, 0.0);
    const auto est = population_mean(p, 1.0, n, c.seed(10));
    c.add(7, "mean |N_1| within 3 se of closed form", std::abs(est.mean - target) / est.std_error, 3.0,
          within_se(est, target), "simulated " + fmt_est(est) + " vs " + fmt(target, 8));

    const auto yule = validate_params(10.0, 1.0, 0.0, 1.0);
    const double formula_gap = std::abs(expected_population(yule, 1.0, 0.0) - std::exp(1.0));
    c.add(7, "r=0 closed form equals e^{rho t}", formula_gap, 1e-12, formula_gap <= 1e-12);
    const auto y = population_mean(yule, 1.0, n, c.seed(11));
    c.add(7, "r=0 simulated mean within 3 se of e^{rho t}", std::abs(y.mean - std::exp(1.0)) / y.std_error, 3.0,
          within_se(y, std::exp(1.0)), "simulated " + fmt_est(y));
}

}  // namespace

std::size_t pathwise_bound_violations(const PopulationSnapshot& snap, const ModelParams& p)
{
    if (snap.truncated || snap.particles.empty())
        return 0;
    const double t = snap.time;
    const double lm = lambda_min(p);
    std::size_t bad = 0;
    auto exceeds = [](std::size_t count, double log_rhs) {
        if (count == 0)
            return false;
        return std::log(static_cast<double>(count)) > log_rhs + 1e-12 * (1.0 + std::abs(log_rhs));
    };
    for (double frac : {0.05, 0.3, 0.6, 0.9, 0.99}) {
        const double l = lm * frac;
        const auto s = spectral(p, l);
        const double zm = log_z(snap.particles, t, p, l, Sign::minus).value();
        const double zp = log_z(snap.particles, t, p, l, Sign::plus).value();
        for (double g : {0.0, 0.5, 1.0, 2.0, 3.0}) {
            const double rhs_minus = (s.e_minus + l * g) * t + zm;
            bad += exceeds(count_region(snap, g, std::nullopt, std::nullopt), rhs_minus);
            bad += exceeds(count_region(snap, g, std::nullopt, std::pair{-1.0, 1.0}), rhs_minus);
            for (double k : {0.25, 0.5, 1.0, 2.0}) {
                const double rhs_plus = (s.e_plus - k * k * s.psi_plus + l * g) * t + zp;
                bad += exceeds(count_region(snap, g, k, std::nullopt), rhs_plus);
            }
        }
    }
    return bad;
}

namespace {

void criterion8(Ctx& c)
{
    const auto p = params_p0();
    const double lam = -0.3;
    const std::size_t n = c.replicas(10000);
    const auto cfg = sim_config(1.0, {0.0, 0.25, 0.5, 0.75, 1.0}, 0.01, 0.002, c.seed(20));
    struct Out {
        double ratio;
        std::size_t violations;
        std::size_t snapshots;
    };
    auto outs = parallel_map(n, [&](std::size_t i) {
        const auto snaps = run(p, {0.0, 0.0}, cfg, i);
        if (snaps.back().truncated)
            throw Error(Errc::CapExceeded, "population cap hit");
        Out o{std::exp(z_value(snaps.back(), p, lam, Sign::minus) - z_value(snaps.front(), p, lam, Sign::minus)), 0,
              snaps.size()};
        for (const auto& s : snaps)
            o.violations += pathwise_bound_violations(s, p);
        return o;
    });
    std::vector<double> ratios;
    std::size_t violations = 0, snapshots = 0;
    for (const auto& o : outs) {
        ratios.push_back(o.ratio);
        violations += o.violations;
        snapshots += o.snapshots;
    }
    const auto est = summarize(ratios, cfg.seed);
    c.add(8, "mean Z-(1)/Z-(0) within 3 se of 1", std::abs(est.mean - 1.0) / est.std_error, 3.0, within_se(est, 1.0),
          fmt_est(est));
    c.add(8, "pathwise bounds, P0 runs", static_cast<double>(violations), 0.0, violations == 0,
          std::to_string(snapshots) + " snapshots checked");
}

struct LowRhoRuns {
    std::vector<std::vector<PopulationSnapshot>> runs;
    std::size_t truncated = 0;
};

LowRhoRuns low_rho_runs(std::size_t wanted, std::uint64_t seed, std::vector<double> times)
{
    const auto p = params_low_rho();
    const double horizon = times.back();
    const auto cfg = sim_config(horizon, std::move(times), 0.05, 0.005, seed);
    LowRhoRuns out;
    std::size_t next = 0;
    while (out.runs.size() < wanted && next < 4 * wanted) {
        const std::size_t batch = wanted - out.runs.size();
        auto got = parallel_map(batch, [&](std::size_t i) { return run(p, {0.0, 0.0}, cfg, next + i); });
        next += batch;
        for (auto& r : got) {
            if (r.back().truncated)
                ++out.truncated;
            else
                out.runs.push_back(std::move(r));
        }
    }
    return out;
}

void criterion9(Ctx& c)
{
    const auto p = params_low_rho();
    const double lam = -0.3;
    const double target = -mu_lambda(p, lam);
    const std::size_t n = c.replicas(200);
    const auto data = low_rho_runs(n, c.seed(30), {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0});

    std::size_t violations = 0, snapshots = 0;
    for (const auto& r : data.runs)
        for (const auto& s : r) {
            violations += pathwise_bound_violations(s, p);
            ++snapshots;
        }
    c.add(8, "pathwise bounds, low-rho runs", static_cast<double>(violations), 0.0, violations == 0,
          std::to_string(snapshots) + " snapshots checked");

    if (data.runs.size() < n) {
        c.add(9, "non-truncated replicas", static_cast<double>(data.runs.size()), static_cast<double>(n), false);
        return;
    }
    std::map<int, double> med;
    for (int t : {2, 4, 6}) {
        std::vector<double> v;
        for (const auto& r : data.runs) {
            const auto& snap = r[static_cast<std::size_t>(t)];
            v.push_back((z_value(snap, p, lam, Sign::plus) - z_value(r.front(), p, lam, Sign::plus)) / t);
        }
        med[t] = median(v);
    }
    const double rel = std::abs(med[6] - target) / std::abs(target);
    c.add(9, "median t^-1 log Zhat+(6) within 25% of -mu", rel, 0.25, rel <= 0.25,
          "median " + fmt(med[6]) + " vs " + fmt(target) + " over " + std::to_string(data.runs.size())
              + " replicas, " + std::to_string(data.truncated) + " truncated");
    const double d2 = std::abs(med[2] - target), d4 = std::abs(med[4] - target), d6 = std::abs(med[6] - target);
    c.add(9, "deviation shrinks over t in {2,4,6}", std::max(d4 - d2, d6 - d4), 0.0, d4 <= d2 && d6 <= d4,
          "deviations " + fmt(d2) + ", " + fmt(d4) + ", " + fmt(d6));

    std::vector<double> slopes;
    for (const auto& r : data.runs)
        slopes.push_back(decay_slope(build_series(r, p, lam, Sign::plus, true), 2.0, 6.0));
    const double ms = median(slopes);
    const double srel = std::abs(ms - target) / std::abs(target);
    c.add(9, "median fitted slope on [2,6] within 25% of -mu", srel, 0.25, srel <= 0.25, "median slope " + fmt(ms));
}

void schedule_law_checks(Ctx& c, const std::string& label, const RateSchedule& schedule, std::size_t n,
                         std::uint64_t seed, const std::string& prefix)
{
    const auto o = outcome_distribution(schedule);
    const auto emp = simulate_bd(schedule, seed, n);
    const std::string law = prefix + "U=" + fmt(o.u_tau) + " V=" + fmt(o.v_tau) + " e^{-nu}=" + fmt(o.mean);
    std::vector<double> observed, expected;
    const std::size_t top = emp.histogram.size() - 1;
    for (std::size_t k = 0; k <= top; ++k) {
        observed.push_back(static_cast<double>(emp.histogram[k]));
        expected.push_back(static_cast<double>(n) * o.pmf(k));
    }
    expected.back() += static_cast<double>(n) * o.tail(top);
    c.guarded(10, label + ": chi-square against the geometric law", [&] {
        try {
            const auto chi = chi_square_test(observed, expected);
            c.add(10, label + ": chi-square against the geometric law", chi.p_value, 0.01, chi.p_value > 0.01,
                  law + " chi2=" + fmt(chi.statistic) + " dof=" + fmt(chi.dof));
        } catch (const Error& e) {
            if (e.code() != Errc::InsufficientData)
                throw;
            c.add(10, label + ": chi-square against the geometric law", std::nan(""), 0.01, false,
                  law + "; " + e.what() + "; largest observed n = " + std::to_string(top));
        }
    });
    const double z = emp.mean.std_error > 0.0 ? std::abs(emp.mean.mean - o.mean) / emp.mean.std_error
                                               : std::numeric_limits<double>::infinity();
    c.add(10, label + ": empirical mean within 3 se of e^{-nu(tau)}", z, 3.0, within_se(emp.mean, o.mean),
          fmt_est(emp.mean) + " vs " + fmt(o.mean));
}

void criterion10(Ctx& c)
{
    {
        const double m = 1.3, tau = 2.0;
        const auto o = outcome_distribution(constant_schedule(0.0, m, tau));
        const double d = std::max({std::abs(o.w_tau - 1.0), std::abs(o.u_tau - (1.0 - std::exp(-m * tau))),
                                   std::abs(o.v_tau)});
        c.add(10, "pure death closed form", d, 1e-10, d <= 1e-10);
    }
    {
        const double b = 0.7, tau = 2.0;
        const auto o = outcome_distribution(constant_schedule(b, 0.0, tau));
        const double d = std::max({std::abs(o.u_tau), std::abs(o.v_tau - (1.0 - std::exp(-b * tau))),
                                   std::abs(o.w_tau - std::exp(b * tau))});
        c.add(10, "Yule closed form", d, 1e-10, d <= 1e-10);
    }

    const auto p = params_p0();
    const AscentSpec spec{1.0, 1.0, 10.0};
    const double lam = delta_gamma_kappa(p, 1.0, 1.0).argmin_lambda;
    const double tau = tau_of_t(p, lam, spec.t);
    const std::size_t n = c.replicas(100000);
    schedule_law_checks(c, "ascent schedule", ascent_schedule(p, optimal_paths(p, spec, lam, tau)), n, c.seed(40),
                        "tau=" + fmt(tau) + " ");
    schedule_law_checks(c, "control schedule b=1.2 d=0.5 tau=2", constant_schedule(1.2, 0.5, 2.0), n, c.seed(41), "");
}

void criterion11(Ctx& c)
{
    const auto p = params_p0();
    {
        const double lam = delta_gamma_kappa(p, 1.0, 1.0).argmin_lambda;
        const std::size_t n = c.replicas(10000);
        SpineConfig cfg{sim_config(1.0, {}, 0.01, 0.01, c.seed(50)), false};
        auto counts = parallel_map(n, [&](std::size_t i) {
            return static_cast<double>(run_spine(p, lam, {0.0, 0.0}, 1.0, cfg, i).n_tau);
        });
        const auto est = summarize(counts, cfg.sim.seed);
        const double target = expected_spine_births(p, lam, 0.0, 1.0);
        c.add(11, "spine birth count mean within 3 se", std::abs(est.mean - target) / est.std_error, 3.0,
              within_se(est, target), fmt_est(est) + " vs " + fmt(target, 8));
    }
    {
        const double lam = -0.3, tau = 0.5;
        const TreeEvent event = [](std::span<const PopulationSnapshot> tree) {
            for (const auto& q : tree.back().particles)
                if (q.y >= 2.0)
                    return true;
            return false;
        };
        const std::size_t n_is = c.replicas(20000), n_direct = c.replicas(100000);
        SpineConfig cfg{sim_config(tau, {}, 0.01, 0.01, c.seed(51)), true};
        const auto is = importance_estimate(p, lam, event, tau, {0.0, 0.0}, n_is, cfg);
        const auto dcfg = sim_config(tau, {tau}, 0.01, 0.01, c.seed(52));
        auto hits = parallel_map(n_direct, [&](std::size_t i) {
            const auto snaps = run(p, {0.0, 0.0}, dcfg, i);
            return event(snaps) ? 1.0 : 0.0;
        });
        const auto direct = summarize(hits, dcfg.seed);
        const double z = std::abs(is.result.mean - direct.mean) / (3.0 * (is.result.std_error + direct.std_error));
        const bool ok = z <= 1.0 && direct.mean >= 1e-3 && !is.result.flagged;
        c.add(11, "IS and direct estimates overlap at 3 sigma", z, 1.0, ok,
              "IS " + fmt_est(is.result) + " (log-weights " + fmt(is.log_weight_min) + "/" + fmt(is.log_weight_median)
                  + "/" + fmt(is.log_weight_max) + ", discarded " + std::to_string(is.result.discarded)
                  + "); direct " + fmt_est(direct));
    }
    {
        const double lam = theta_cost(p, 1.0, 1.0).lambda_bar_ascent;
        const double theta_bk = theta_cost(p, 1.0, 1.0).theta_bk;
        std::string degenerate;
        std::string taus;
        for (double t : {4.0, 9.0, 16.0}) {
            const double tau = tau_of_t(p, lam, t);
            taus += "tau(" + fmt(t) + ")=" + fmt(tau) + " ";
            if (tau <= 0.0)
                degenerate += (degenerate.empty() ? "" : ", ") + fmt(t);
        }
        if (!degenerate.empty()) {
            c.add(11, "short-climb slope within 30% of Theta(1,1)", std::nan(""), 0.3, false,
                  "clock gives an empty ascent window (DegenerateTau) at t = " + degenerate + "; " + taus
                      + "; mu at lambda_bar_ascent = " + fmt(mu_lambda(p, lam)));
            c.add(11, "short-climb exponent nondecreasing in t", std::nan(""), 0.0, false,
                  "not evaluable without an ascent window at every t");
            return;
        }
        const ShortClimbSpec base{0.25, 0.25, 0.0, 1.0, 1.0};
        std::vector<double> ts, logs;
        for (double t : {4.0, 9.0, 16.0}) {
            ShortClimbSpec sc = base;
            sc.t = t;
            const double tau = tau_of_t(p, lam, t);
            std::vector<double> grid;
            const std::size_t steps = static_cast<std::size_t>(std::ceil(tau * 64.0));
            for (std::size_t k = 0; k <= steps; ++k)
                grid.push_back(tau * static_cast<double>(k) / static_cast<double>(steps));
            SpineConfig cfg{sim_config(tau, grid, 0.01, 0.05, c.seed(53)), true};
            const TreeEvent event = [&](std::span<const PopulationSnapshot> tree) {
                return short_climb_indicator(tree, sc, p);
            };
            const auto est = importance_estimate(p, lam, event, tau, {0.0, 0.0}, c.replicas(2000), cfg);
            ts.push_back(t);
            logs.push_back(-std::log(est.result.mean));
        }
        const double slope = ls_slope(ts, logs);
        const double rel = std::abs(slope - theta_bk) / theta_bk;
        c.add(11, "short-climb slope within 30% of Theta(1,1)", rel, 0.3, rel <= 0.3, "slope " + fmt(slope));
        bool mono = true;
        for (std::size_t i = 1; i < ts.size(); ++i)
            mono = mono && logs[i] / ts[i] >= logs[i - 1] / ts[i - 1];
        c.add(11, "short-climb exponent nondecreasing in t", 0.0, 0.0, mono);
    }
}

void criterion12(Ctx& c)
{
    const auto p = params_low_rho();
    const std::size_t n = c.replicas(100);
    const auto data = low_rho_runs(n, c.seed(60), {2.0, 4.0, 6.0});
    if (data.runs.size() < std::min<std::size_t>(n, 50)) {
        c.add(12, "non-truncated replicas", static_cast<double>(data.runs.size()), 50.0, false);
        return;
    }
    for (double g : {0.0, 1.0}) {
        std::vector<double> v;
        for (const auto& r : data.runs) {
            const auto cnt = count_region(r[2], g, std::nullopt, std::nullopt);
            v.push_back(cnt > 0 ? std::log(static_cast<double>(cnt)) / 6.0 : -std::numeric_limits<double>::infinity());
        }
        const double m = median(v);
        const double theory = delta_gamma(p, g).value.value();
        const double d = std::abs(m - theory);
        c.add(12, "median t^-1 log N_6(" + fmt(g) + ") within 0.25 of Delta", d, 0.25, d <= 0.25,
              "median " + fmt(m) + " vs " + fmt(theory));
    }
    const double ct = wave_speed(p).c_tilde;
    std::map<int, double> med;
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> v;
        for (const auto& r : data.runs)
            v.push_back(extremes(r[k]).min_x / r[k].time);
        med[static_cast<int>(k)] = median(v);
    }
    c.add(12, "median min X/t at t=6 in [-c_tilde, -0.75 c_tilde]", med[2] / -ct, 0.75,
          med[2] >= -ct && med[2] <= -0.75 * ct, "median " + fmt(med[2]) + ", c_tilde " + fmt(ct));
    c.add(12, "median min X/t decreasing over t in {2,4,6}", med[2] - med[1], 0.0, med[1] <= med[0] && med[2] <= med[1],
          fmt(med[0]) + ", " + fmt(med[1]) + ", " + fmt(med[2]));

    const double g = 2.0, k = 2.0;
    const double dgk = delta_gamma_kappa(p, g, k).value.value();
    std::size_t zero = 0;
    for (const auto& r : data.runs)
        zero += count_region(r[2], g, k, std::nullopt) == 0;
    const double frac = static_cast<double>(zero) / static_cast<double>(data.runs.size());
    c.add(12, "space-type count zero at t=6 when Delta(2,2) < 0", frac, 0.95, dgk < 0.0 && frac >= 0.95,
          "Delta(2,2) = " + fmt(dgk));
}

using CriterionFn = void (*)(Ctx&);

struct SuiteDef {
    std::string name;
    std::uint64_t default_seed;
    std::vector<std::pair<int, CriterionFn>> criteria;
};

const std::vector<SuiteDef>& suites()
{
    static const std::vector<SuiteDef> defs{
        {"closed-form", 1, {{1, criterion1}, {2, criterion2}, {3, criterion3}}},
        {"paths", 1, {{4, criterion4}, {5, criterion5}}},
        {"oracle", 1001, {{6, criterion6}, {7, criterion7}}},
        {"martingale", 2002, {{8, criterion8}, {9, criterion9}}},
        {"birthdeath", 3003, {{10, criterion10}}},
        {"spine", 4004, {{11, criterion11}}},
        {"growth", 5005, {{12, criterion12}}},
    };
    return defs;
}

}  // namespace

bool SuiteReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<CriterionOutcome> SuiteReport::by_criterion() const
{
    std::map<int, CriterionOutcome> grouped;
    for (const auto& c : checks) {
        auto& o = grouped.try_emplace(c.criterion, CriterionOutcome{c.criterion, true, {}}).first->second;
        o.passed = o.passed && c.passed;
        o.checks.push_back(&c);
    }
    std::vector<CriterionOutcome> out;
    for (auto& [k, v] : grouped)
        out.push_back(std::move(v));
    return out;
}

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& s : suites())
            n.push_back(s.name);
        n.push_back("all");
        return n;
    }();
    return names;
}

SuiteReport verify_suite(std::string_view name, const SuiteOptions& options)
{
    SuiteReport report;
    report.suite = std::string(name);
    const auto t0 = Clock::now();
    bool found = false;
    for (const auto& s : suites()) {
        if (name != "all" && name != s.name)
            continue;
        found = true;
        Ctx ctx(report, options, s.default_seed);
        for (const auto& [id, fn] : s.criteria) {
            ctx.guarded(id, criterion_titles().at(id), [&] { fn(ctx); });
            ctx.finish(id);
        }
    }
    if (!found)
        throw Error(Errc::InvalidConfig, "unknown suite '" + std::string(name) + "'");
    report.seconds = seconds_since(t0);
    return report;
}

Table report_table(const SuiteReport& report)
{
    Table t{{"criterion", "check", "measured", "threshold", "passed", "detail"}, {}};
    for (const auto& c : report.checks)
        t.rows.push_back({static_cast<std::int64_t>(c.criterion), c.name, c.measured, c.threshold,
                          std::string(c.passed ? "pass" : "fail"), c.detail});
    return t;
}

std::string criterion_line(const CriterionOutcome& o)
{
    std::size_t failed = 0;
    for (const auto* c : o.checks)
        failed += !c->passed;
    std::ostringstream os;
    os << "criterion " << o.criterion << ": " << (o.passed ? "PASS" : "FAIL") << "  "
       << criterion_titles().at(o.criterion) << " (" << o.checks.size() - failed << "/" << o.checks.size()
       << " checks passed)";
    return os.str();
}

std::vector<std::string> report_summary(const SuiteReport& report)
{
    std::vector<std::string> lines;
    lines.push_back("suite " + report.suite + ": " + (report.passed() ? "PASS" : "FAIL") + " in "
                    + fmt(report.seconds, 3) + " s" + (report.underpowered ? " (underpowered)" : ""));
    for (const auto& o : report.by_criterion()) {
        lines.push_back(criterion_line(o));
        for (const auto* c : o.checks) {
            std::string line = std::string("    [") + (c->passed ? "pass" : "FAIL") + "] " + c->name
                               + ": measured " + fmt(c->measured) + ", threshold " + fmt(c->threshold);
            if (!c->detail.empty())
                line += " -- " + c->detail;
            lines.push_back(line);
        }
    }
    return lines;
}

}  // namespace branchlab
