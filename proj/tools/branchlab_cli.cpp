#include "branchlab/birthdeath.hpp"
#include "branchlab/error.hpp"
#include "branchlab/martingale.hpp"
#include "branchlab/oracle.hpp"
#include "branchlab/parallel.hpp"
#include "branchlab/paths.hpp"
#include "branchlab/spine.hpp"
#include "branchlab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace branchlab;

namespace {

enum Exit { ok = 0, invalid = 1, capped = 2, verify_failed = 3 };

struct Invocation {
    std::string config_file;
    std::string out_dir = ".";
    std::map<std::string, std::string> overrides;
};

// Binds a flag to a dotted config key; the value is applied after the file.
void bind(CLI::App* sub, Invocation& inv, const std::string& flag, const std::string& key, const std::string& help)
{
    sub->add_option_function<std::string>(
        flag, [&inv, key](const std::string& v) { inv.overrides[key] = v; }, help + " [" + key + "]");
}

void add_common(CLI::App* sub, Invocation& inv)
{
    sub->add_option("--config", inv.config_file, "key=value config file");
    sub->add_option("--out", inv.out_dir, "output directory");
    bind(sub, inv, "--theta", "params.theta", "type diffusion rate");
    bind(sub, inv, "--a", "params.a", "spatial variance coefficient");
    bind(sub, inv, "--r", "params.r", "quadratic branching coefficient");
    bind(sub, inv, "--rho", "params.rho", "baseline branching rate");
    bind(sub, inv, "--seed", "seed", "master seed");
}

void add_sim(CLI::App* sub, Invocation& inv)
{
    bind(sub, inv, "--h-max", "sim.h_max", "largest time step");
    bind(sub, inv, "--c-step", "sim.c_step", "step size constant, h <= c_step / R(y)");
    bind(sub, inv, "--cap", "sim.cap", "population cap");
    bind(sub, inv, "--replicas", "sim.replicas", "number of replicas");
    bind(sub, inv, "--x0", "start.x", "initial position");
    bind(sub, inv, "--y0", "start.y", "initial type");
}

class Run {
public:
    Run(std::string command, const Invocation& inv) : command_(std::move(command)), out_(inv.out_dir)
    {
        if (!inv.config_file.empty())
            cfg_ = load_config_file(inv.config_file);
        for (const auto& [k, v] : inv.overrides)
            cfg_[k] = v;
    }

    double num(const std::string& key, double fallback)
    {
        const double v = config_double(cfg_, key, fallback);
        cfg_[key] = format_double(v);
        return v;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback)
    {
        const auto v = config_u64(cfg_, key, fallback);
        cfg_[key] = std::to_string(v);
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        auto it = cfg_.find(key);
        if (it == cfg_.end())
            it = cfg_.emplace(key, fallback).first;
        return it->second;
    }

    std::vector<double> list(const std::string& key, const std::string& fallback)
    {
        const auto v = config_list(cfg_, key, parse_grid(fallback));
        text(key, fallback);
        return v;
    }

    bool has(const std::string& key) const { return cfg_.count(key) != 0; }

    ModelParams params()
    {
        return validate_params(num("params.theta", 10.0), num("params.a", 1.0), num("params.r", 1.0),
                               num("params.rho", 1.0));
    }

    SimConfig sim(double horizon, std::vector<double> times)
    {
        SimConfig c;
        c.h_max = num("sim.h_max", c.h_max);
        c.c_step = num("sim.c_step", c.c_step);
        c.cap = u64("sim.cap", c.cap);
        c.horizon = horizon;
        c.snapshot_times = std::move(times);
        c.seed = u64("seed", 1);
        c.validate();
        return c;
    }

    State start() { return {num("start.x", 0.0), num("start.y", 0.0)}; }

    void truncated(std::string id) { truncated_.push_back(std::move(id)); }

    void attach(std::string suffix, nlohmann::ordered_json doc) { attached_.emplace_back(std::move(suffix), std::move(doc)); }

    int finish(const Table& table, const std::vector<std::string>& summary)
    {
        fs::create_directories(out_);
        emit_report(table, summary, out_ / (command_ + ".csv"), out_ / (command_ + "_summary.txt"));
        Manifest m;
        m.command = command_;
        m.config = cfg_;
        m.seed = config_u64(cfg_, "seed", 1);
        m.version = BRANCHLAB_VERSION;
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        m.truncated_replicas = truncated_;
        std::ofstream(out_ / (command_ + "_manifest.json")) << manifest_to_json(m) << '\n';
        for (const auto& [suffix, doc] : attached_)
            std::ofstream(out_ / (command_ + "_" + suffix + ".json")) << doc.dump(2) << '\n';
        std::cout << render_summary(table, summary);
        return truncated_.empty() ? ok : capped;
    }

private:
    std::string command_;
    fs::path out_;
    ConfigMap cfg_;
    std::vector<std::string> truncated_;
    std::vector<std::pair<std::string, nlohmann::ordered_json>> attached_;
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

Cell rate_cell(const std::function<ExtReal()>& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == Errc::BoundaryCase)
            return std::string("nan");
        throw;
    }
}

int cmd_rates(const Invocation& inv)
{
    Run run("rates", inv);
    const auto p = run.params();
    const auto gammas = run.list("rates.gamma_grid", "0:4:0.5");
    const auto kappas = run.list("rates.kappa_grid", "0:2:0.5");
    Table t{{"gamma", "kappa", "delta", "lambda_bar", "D"}, {}};
    for (double g : gammas)
        for (double k : kappas) {
            const auto d = delta_gamma_kappa(p, g, k);
            t.rows.push_back({g, k, d.value, d.argmin_lambda, rate_cell([&] { return growth_rate_D(p, g, k); })});
        }
    const auto w = wave_speed(p);
    return run.finish(t, {"c_tilde = " + format_double(w.c_tilde), "lambda_tilde = " + format_double(w.lambda_tilde)});
}

int cmd_paths(const Invocation& inv)
{
    Run run("paths", inv);
    const auto p = run.params();
    const AscentSpec spec{run.num("paths.beta", 1.0), run.num("paths.kappa", 1.0), run.num("paths.t", 100.0)};
    const std::string which = run.text("paths.lambda", "ascent");
    double lambda = 0.0, tau = 0.0;
    if (which == "ascent" || which == "hat") {
        lambda = theta_cost(p, spec.beta, spec.kappa).lambda_bar_ascent;
        tau = run.has("paths.tau") ? run.num("paths.tau", 0.0) : tau_of_t(p, lambda, spec.t);
        if (which == "hat")
            lambda = lambda_hat(p, spec, tau);
    } else {
        lambda = run.num("paths.lambda", 0.0);
        tau = run.has("paths.tau") ? run.num("paths.tau", 0.0) : tau_of_t(p, lambda, spec.t);
    }
    run.num("paths.tau", tau);
    const auto ascent = optimal_paths(p, spec, lambda, tau);
    const auto points = run.u64("paths.points", 201);
    Table t{{"s", "y", "x"}, {}};
    for (std::uint64_t i = 0; i < points; ++i) {
        const double s = tau * static_cast<double>(i) / static_cast<double>(points - 1);
        t.rows.push_back({s, ascent.y_path(s).value, ascent.x_path(s).value});
    }
    const auto j = functional_J(p, ascent.x_path, ascent.y_path, tau, FunctionalMode::sup);
    return run.finish(t, {"lambda = " + format_double(lambda), "tau = " + format_double(tau),
                          "mu = " + format_double(ascent.mu), "cost (closed form) = " + format_double(ascent.cost),
                          "J (quadrature) = " + format_double(j.j_value), "L = " + format_double(j.l_value),
                          "argmax s = " + format_double(j.argmax_s),
                          "per-t cost = " + format_double(ascent_cost_limit(p, spec.beta, spec.kappa, tau))});
}

std::vector<std::vector<PopulationSnapshot>> simulate_runs(Run& run, const ModelParams& p, double horizon,
                                                           std::vector<double> times)
{
    const auto cfg = run.sim(horizon, std::move(times));
    const auto start = run.start();
    const auto n = run.u64("sim.replicas", 100);
    auto runs = parallel_map(n, [&](std::size_t i) { return branchlab::run(p, start, cfg, i); });
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (runs[i].back().truncated)
            run.truncated("replica " + std::to_string(i));
    return runs;
}

int cmd_simulate(const Invocation& inv)
{
    Run run("simulate", inv);
    const auto p = run.params();
    const double horizon = run.num("sim.horizon", 1.0);
    const auto times = run.list("sim.snapshots", format_double(horizon));
    const bool particles = run.u64("sim.write_particles", 0) != 0;
    const auto runs = simulate_runs(run, p, horizon, times);
    Table t;
    if (particles)
        t.columns = {"replica", "time", "label", "x", "y"};
    else
        t.columns = {"replica", "time", "population", "min_x", "max_x", "max_abs_y", "truncated"};
    std::vector<double> final_sizes;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (const auto& s : runs[i]) {
            if (particles) {
                for (const auto& q : s.particles)
                    t.rows.push_back({static_cast<std::int64_t>(i), s.time, label_text(q.label), q.x, q.y});
                continue;
            }
            const auto e = s.particles.empty() ? Extremes{NAN, NAN, NAN} : extremes(s);
            t.rows.push_back({static_cast<std::int64_t>(i), s.time, static_cast<std::int64_t>(s.particles.size()),
                              e.min_x, e.max_x, e.max_abs_y, static_cast<std::int64_t>(s.truncated)});
        }
        if (!runs[i].back().truncated)
            final_sizes.push_back(static_cast<double>(runs[i].back().particles.size()));
    }
    std::vector<std::string> summary;
    if (!final_sizes.empty()) {
        const auto e = summarize(final_sizes, run.u64("seed", 1));
        summary.push_back("mean population at horizon = " + format_double(e.mean) + " +- " + format_double(e.std_error));
        summary.push_back("expected population = " + format_double(expected_population(p, horizon, run.start().y)));
    }
    return run.finish(t, summary);
}

Sign parse_sign(const std::string& s)
{
    if (s == "minus")
        return Sign::minus;
    if (s == "plus")
        return Sign::plus;
    throw Error(Errc::InvalidConfig, "sign must be minus or plus, got '" + s + "'");
}

int cmd_martingale(const Invocation& inv)
{
    Run run("martingale", inv);
    const auto p = run.params();
    const double lambda = run.num("martingale.lambda", -0.3);
    const Sign sign = parse_sign(run.text("martingale.sign", "minus"));
    const double horizon = run.num("sim.horizon", 1.0);
    const auto times = run.list("sim.snapshots", "0:" + format_double(horizon) + ":0.25");
    const auto runs = simulate_runs(run, p, horizon, times);
    Table t{{"replica", "time", "lambda", "sign", "log_value"}, {}};
    for (std::size_t i = 0; i < runs.size(); ++i)
        for (const auto& s : runs[i])
            if (!s.truncated)
                t.rows.push_back({static_cast<std::int64_t>(i), s.time, lambda, std::string(sign_name(sign)),
                                  z_value(s, p, lambda, sign)});
    return run.finish(t, {"lambda = " + format_double(lambda), std::string("sign = ") + sign_name(sign),
                          "theoretical decay rate = " + format_double(martingale_decay_rate(p, lambda, sign))});
}

int cmd_spine(const Invocation& inv)
{
    Run run("spine", inv);
    const auto p = run.params();
    const double lambda = run.num("spine.lambda", -0.3);
    const double tau = run.num("spine.tau", 0.5);
    SpineConfig cfg{run.sim(tau, {}), run.u64("spine.subtrees", 0) != 0};
    const auto start = run.start();
    const auto n = run.u64("sim.replicas", 100);
    const double level = run.num("spine.event_level", 0.0);
    std::vector<std::string> summary{"expected n_tau = " + format_double(expected_spine_births(p, lambda, start.y, tau))};
    Table t{{"replica", "s", "xi", "eta", "is_birth"}, {}};
    auto runs = parallel_map(n, [&](std::size_t i) { return run_spine(p, lambda, start, tau, cfg, i); });
    std::vector<double> counts;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        for (const auto& q : r.spine_path)
            t.rows.push_back({static_cast<std::int64_t>(i), q.s, q.xi, q.eta, static_cast<std::int64_t>(q.is_birth)});
        counts.push_back(static_cast<double>(r.n_tau));
        if (r.truncated)
            run.truncated("replica " + std::to_string(i));
    }
    const auto e = summarize(counts, cfg.sim.seed);
    summary.push_back("mean n_tau = " + format_double(e.mean) + " +- " + format_double(e.std_error));
    nlohmann::ordered_json est;
    est["lambda"] = lambda;
    est["tau"] = tau;
    est["replicas"] = n;
    est["n_tau_mean"] = e.mean;
    est["n_tau_std_error"] = e.std_error;
    est["n_tau_expected"] = expected_spine_births(p, lambda, start.y, tau);
    if (level > 0.0) {
        cfg.simulate_subtrees = true;
        const TreeEvent event = [level](std::span<const PopulationSnapshot> tree) {
            for (const auto& q : tree.back().particles)
                if (q.y >= level)
                    return true;
            return false;
        };
        const auto is = importance_estimate(p, lambda, event, tau, start, n, cfg);
        summary.push_back("IS estimate of P(max Y(tau) >= " + format_double(level) + ") = " + format_double(is.result.mean)
                          + " +- " + format_double(is.result.std_error));
        summary.push_back("log-weight min/median/max = " + format_double(is.log_weight_min) + " / "
                          + format_double(is.log_weight_median) + " / " + format_double(is.log_weight_max));
        est["event_level"] = level;
        est["estimate"] = is.result.mean;
        est["std_error"] = is.result.std_error;
        est["discarded"] = is.result.discarded;
        est["log_weight_min"] = is.log_weight_min;
        est["log_weight_median"] = is.log_weight_median;
        est["log_weight_max"] = is.log_weight_max;
        if (is.result.flagged)
            run.truncated("importance sampling: more than 1% of replicas discarded");
    }
    run.attach("estimate", std::move(est));
    return run.finish(t, summary);
}

int cmd_birthdeath(const Invocation& inv)
{
    Run run("birthdeath", inv);
    const std::string kind = run.text("bd.schedule", "constant");
    RateSchedule schedule;
    if (kind == "constant") {
        schedule = constant_schedule(run.num("bd.birth", 0.7), run.num("bd.death", 0.0), run.num("bd.tau", 2.0));
    } else if (kind == "ascent") {
        const auto p = run.params();
        const AscentSpec spec{run.num("paths.beta", 1.0), run.num("paths.kappa", 1.0), run.num("paths.t", 10.0)};
        const double lambda = run.num("paths.lambda", delta_gamma_kappa(p, 1.0, 1.0).argmin_lambda);
        const double tau = run.num("paths.tau", tau_of_t(p, lambda, spec.t));
        schedule = ascent_schedule(p, optimal_paths(p, spec, lambda, tau));
    } else {
        throw Error(Errc::InvalidConfig, "bd.schedule must be constant or ascent, got '" + kind + "'");
    }
    const auto o = outcome_distribution(schedule);
    const auto n = run.u64("sim.replicas", 0);
    const auto n_max = run.u64("bd.n_max", 20);
    std::vector<std::string> summary{
        "W = " + format_double(o.w_tau), "U = " + format_double(o.u_tau), "V = " + format_double(o.v_tau),
        "nu(tau) = " + format_double(o.nu_tau), "mean = " + format_double(o.mean),
        "extinction probability = " + format_double(o.extinction_prob)};
    Table t{{"n", "pmf", "empirical"}, {}};
    std::optional<EmpiricalBD> emp;
    if (n > 0) {
        emp = simulate_bd(schedule, run.u64("seed", 1), n);
        summary.push_back("empirical mean = " + format_double(emp->mean.mean) + " +- "
                          + format_double(emp->mean.std_error));
    }
    for (std::size_t k = 0; k <= n_max; ++k) {
        Cell e = std::string("nan");
        if (emp)
            e = k < emp->histogram.size() ? static_cast<double>(emp->histogram[k]) / static_cast<double>(n) : 0.0;
        t.rows.push_back({static_cast<std::int64_t>(k), o.pmf(k), e});
    }
    const auto s = survival_approximation(schedule);
    summary.push_back("survival exact / approx = " + format_double(s.exact) + " / " + format_double(s.approx)
                      + (s.applicable ? "" : " (L below the large-L threshold)"));
    return run.finish(t, summary);
}

BoundedFn named_function(const std::string& name)
{
    if (name == "one")
        return {[](double, double) { return 1.0; }, 1.0};
    if (name == "band")
        return {[](double, double y) { return (y >= -1.0 && y <= 1.0) ? 1.0 : 0.0; }, 1.0};
    if (name == "gauss")
        return {[](double x, double y) { return std::exp(-x * x - y * y); }, 1.0};
    throw Error(Errc::InvalidConfig, "oracle.f must be one, band or gauss, got '" + name + "'");
}

int cmd_oracle(const Invocation& inv)
{
    Run run("oracle", inv);
    const auto p = run.params();
    const double t = run.num("oracle.t", 1.0);
    const auto f = named_function(run.text("oracle.f", "one"));
    const auto start = run.start();
    const auto n = run.u64("sim.replicas", 10000);
    const OracleConfig cfg{run.num("sim.h_max", 0.01), run.num("sim.c_step", 0.005), run.u64("seed", 1)};
    const double lambda = run.num("oracle.lambda", -0.3);
    const auto m2o = many_to_one_expectation(p, f, t, start, n, cfg);
    const auto tr = transformed_expectation(p, lambda, f, t, start, n, cfg);
    Table table{{"estimator", "mean", "std_error", "replicas", "unbounded_weight"}, {}};
    for (const auto& [name, e] : {std::pair{"many_to_one", m2o}, std::pair{"transformed", tr}})
        table.rows.push_back({std::string(name), e.result.mean, e.result.std_error,
                              static_cast<std::int64_t>(e.result.replicas), static_cast<std::int64_t>(e.unbounded_weight)});
    return run.finish(table, {"expected population (f = 1) = " + format_double(expected_population(p, t, start.y))});
}

int cmd_verify(const Invocation& inv, const std::string& suite)
{
    Run run("verify", inv);
    SuiteOptions opt;
    if (run.has("seed"))
        opt.seed = run.u64("seed", 0);
    if (run.has("sim.replicas"))
        opt.replicas = run.u64("sim.replicas", 0);
    run.text("verify.suite", suite);
    const auto report = verify_suite(suite, opt);
    const int status = run.finish(report_table(report), report_summary(report));
    return report.passed() ? status : verify_failed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"branchlab: branching diffusion experiments"};
    app.require_subcommand(1);
    Invocation inv;
    std::string suite = "all";

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"rates", "growth-rate table over a (gamma, kappa) grid"},
             {"paths", "optimal ascent paths and their cost"},
             {"simulate", "branching simulation"},
             {"martingale", "martingale series along simulated runs"},
             {"spine", "spine runs under the changed measure"},
             {"birthdeath", "birth-death outcome law"},
             {"oracle", "single-particle oracle estimates"},
             {"verify", "acceptance suites"}}) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, inv);
        subs[name] = sub;
    }
    bind(subs["rates"], inv, "--gamma-grid", "rates.gamma_grid", "lo:hi:step or comma list");
    bind(subs["rates"], inv, "--kappa-grid", "rates.kappa_grid", "lo:hi:step or comma list");
    for (const char* name : {"paths", "birthdeath"}) {
        bind(subs[name], inv, "--beta", "paths.beta", "spatial target coefficient");
        bind(subs[name], inv, "--kappa", "paths.kappa", "type target coefficient");
        bind(subs[name], inv, "--t", "paths.t", "time horizon");
        bind(subs[name], inv, "--tau", "paths.tau", "ascent window");
        bind(subs[name], inv, "--lambda", "paths.lambda", "ascent | hat | number");
    }
    bind(subs["paths"], inv, "--points", "paths.points", "number of path samples");
    for (const char* name : {"simulate", "martingale", "spine", "birthdeath", "oracle"})
        add_sim(subs[name], inv);
    for (const char* name : {"simulate", "martingale"}) {
        bind(subs[name], inv, "--horizon", "sim.horizon", "simulation horizon");
        bind(subs[name], inv, "--snapshots", "sim.snapshots", "snapshot times");
    }
    bind(subs["simulate"], inv, "--write-particles", "sim.write_particles", "1 to emit every particle");
    bind(subs["martingale"], inv, "--mg-lambda", "martingale.lambda", "martingale parameter");
    bind(subs["martingale"], inv, "--sign", "martingale.sign", "minus | plus");
    bind(subs["spine"], inv, "--spine-lambda", "spine.lambda", "changed-measure parameter");
    bind(subs["spine"], inv, "--spine-tau", "spine.tau", "horizon");
    bind(subs["spine"], inv, "--subtrees", "spine.subtrees", "1 to grow the subtrees");
    bind(subs["spine"], inv, "--event-level", "spine.event_level", "IS estimate of max Y >= level");
    bind(subs["birthdeath"], inv, "--schedule", "bd.schedule", "constant | ascent");
    bind(subs["birthdeath"], inv, "--birth", "bd.birth", "constant birth rate");
    bind(subs["birthdeath"], inv, "--death", "bd.death", "constant death rate");
    bind(subs["birthdeath"], inv, "--bd-tau", "bd.tau", "constant-schedule horizon");
    bind(subs["birthdeath"], inv, "--n-max", "bd.n_max", "largest n in the pmf table");
    bind(subs["oracle"], inv, "--f", "oracle.f", "one | band | gauss");
    bind(subs["oracle"], inv, "--oracle-t", "oracle.t", "time");
    bind(subs["oracle"], inv, "--oracle-lambda", "oracle.lambda", "transformed-measure parameter");
    subs["verify"]->add_option("--suite", suite, "suite name")->check(CLI::IsMember(suite_names()));
    bind(subs["verify"], inv, "--replicas", "sim.replicas", "override every Monte Carlo count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return invalid;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "rates")
            return cmd_rates(inv);
        if (name == "paths")
            return cmd_paths(inv);
        if (name == "simulate")
            return cmd_simulate(inv);
        if (name == "martingale")
            return cmd_martingale(inv);
        if (name == "spine")
            return cmd_spine(inv);
        if (name == "birthdeath")
            return cmd_birthdeath(inv);
        if (name == "oracle")
            return cmd_oracle(inv);
        return cmd_verify(inv, suite);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == Errc::CapExceeded ? capped : invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return invalid;
    }
}
