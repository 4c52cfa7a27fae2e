#include "branchlab/birthdeath.hpp"

#include "branchlab/error.hpp"
#include "branchlab/numerics.hpp"
#include "branchlab/parallel.hpp"
#include "branchlab/rng.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace branchlab {

namespace odeint = boost::numeric::odeint;

RateSchedule constant_schedule(double birth, double death, double tau)
{
    if (!(birth >= 0.0) || !(death >= 0.0) || !(tau >= 0.0))
        throw Error(Errc::DomainError, "rates and horizon must be nonnegative");
    return {[birth](double) { return birth; }, [death](double) { return death; }, tau};
}

RateSchedule ascent_schedule(const ModelParams& p, const OptimalAscent& ascent)
{
    auto y = ascent.y_path;
    auto x = ascent.x_path;
    RateSchedule out;
    out.horizon = ascent.tau;
    out.birth_rate = [p, y](double s) {
        const double v = y(s).value;
        return p.rho + p.r * v * v;
    };
    out.death_rate = [p, y, x](double s) {
        const auto ys = y(s);
        const auto xs = x(s);
        const double drift = ys.derivative + 0.5 * p.theta * ys.value;
        double spatial = 0.0;
        if (ys.value != 0.0)
            spatial = xs.derivative * xs.derivative / (2.0 * p.a * ys.value * ys.value);
        else if (xs.derivative != 0.0)
            throw Error(Errc::SingularPath, "death rate singular: y vanishes with nonzero xdot");
        return drift * drift / (2.0 * p.theta) + spatial;
    };
    return out;
}

double nu(const RateSchedule& schedule, double s)
{
    if (!(s >= 0.0 && s <= schedule.horizon))
        throw Error(Errc::DomainError, "nu needs 0 <= s <= tau");
    if (s == 0.0)
        return 0.0;
    auto f = [&](double w) { return schedule.death_rate(w) - schedule.birth_rate(w); };
    const auto q = integrate(f, 0.0, s);
    if (!std::isfinite(q.value) || q.error > 1e-6 * std::max(1.0, std::abs(q.value)))
        throw Error(Errc::QuadratureDivergence, "nu quadrature did not converge");
    return q.value;
}

namespace {

using OdeState = std::array<double, 2>;  // (nu, W)

auto bd_system(const RateSchedule& schedule)
{
    return [&schedule](const OdeState& z, OdeState& dz, double s) {
        const double b = schedule.birth_rate(s), d = schedule.death_rate(s);
        dz[0] = d - b;
        dz[1] = (b - d) * z[1] + d;
    };
}

}  // namespace

double BDOutcome::pmf(std::size_t n) const
{
    if (n == 0)
        return u_tau;
    return (1.0 - u_tau) * (1.0 - v_tau) * std::pow(v_tau, static_cast<double>(n - 1));
}

double BDOutcome::tail(std::size_t n) const
{
    return (1.0 - u_tau) * std::pow(v_tau, static_cast<double>(n));
}

std::vector<double> BDOutcome::pmf_table(std::size_t n_max) const
{
    std::vector<double> out(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n)
        out[n] = pmf(n);
    return out;
}

BDOutcome outcome_distribution(const RateSchedule& schedule)
{
    OdeState z{0.0, 1.0};
    if (schedule.horizon > 0.0) {
        auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<OdeState>());
        odeint::integrate_adaptive(stepper, bd_system(schedule), z, 0.0, schedule.horizon,
                                   schedule.horizon / 1024.0);
    }
    BDOutcome out{};
    out.nu_tau = z[0];
    out.w_tau = z[1];
    out.mean = std::exp(-z[0]);
    out.u_tau = 1.0 - out.mean / out.w_tau;
    out.v_tau = 1.0 - 1.0 / out.w_tau;
    out.extinction_prob = out.u_tau;
    out.conditional_mean = out.w_tau;
    return out;
}

EmpiricalBD simulate_bd(const RateSchedule& schedule, std::uint64_t seed, std::size_t replicas, std::size_t cells,
                        double safety)
{
    const double tau = schedule.horizon;
    std::vector<double> bound(cells);
    const double width = tau / static_cast<double>(cells);
    auto total = [&](double s) { return schedule.birth_rate(s) + schedule.death_rate(s); };
    for (std::size_t c = 0; c < cells; ++c) {
        const double a = width * static_cast<double>(c);
        bound[c] = safety * std::max({total(a), total(a + 0.5 * width), total(a + width)});
    }

    auto finals = parallel_map(replicas, [&](std::size_t i) {
        Stream rng(replica_key(seed, i));
        std::size_t n = 1;
        for (std::size_t c = 0; c < cells && n > 0; ++c) {
            const double end = width * static_cast<double>(c + 1);
            double s = width * static_cast<double>(c);
            if (bound[c] <= 0.0)
                continue;
            while (n > 0) {
                s += -std::log1p(-rng.uniform()) / (static_cast<double>(n) * bound[c]);
                if (s >= end)
                    break;
                const double b = schedule.birth_rate(s), d = schedule.death_rate(s);
                if (b + d > bound[c]) {
                    std::ostringstream os;
                    os << "rate " << b + d << " exceeds majorant " << bound[c] << " at s=" << s;
                    throw Error(Errc::MajorantViolation, os.str());
                }
                const double u = rng.uniform() * bound[c];
                if (u < b)
                    ++n;
                else if (u < b + d)
                    --n;
            }
        }
        return n;
    });

    EmpiricalBD out{};
    out.replicas = replicas;
    out.seed = seed;
    std::vector<double> m, ext, cond;
    for (std::size_t n : finals) {
        if (n >= out.histogram.size())
            out.histogram.resize(n + 1, 0);
        ++out.histogram[n];
        m.push_back(static_cast<double>(n));
        ext.push_back(n == 0 ? 1.0 : 0.0);
        if (n > 0)
            cond.push_back(static_cast<double>(n));
    }
    out.mean = summarize(m, seed);
    out.extinction = summarize(ext, seed);
    out.conditional_mean = summarize(cond, seed);
    return out;
}

SurvivalApprox survival_approximation(const RateSchedule& schedule)
{
    const double tau = schedule.horizon;
    constexpr std::size_t points = 4096;
    std::vector<double> times(points + 1), nus;
    for (std::size_t k = 0; k <= points; ++k)
        times[k] = tau * static_cast<double>(k) / points;
    times.back() = tau;

    OdeState z{0.0, 1.0};
    if (tau > 0.0) {
        auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<OdeState>());
        odeint::integrate_times(stepper, bd_system(schedule), z, times.begin(), times.end(), tau / points,
                                [&](const OdeState& st, double) { nus.push_back(st[0]); });
    } else {
        nus.assign(points + 1, 0.0);
    }
    const double L = *std::max_element(nus.begin(), nus.end());
    double k_inv = 0.0;
    if (tau > 0.0) {
        const double h = tau / points;
        for (std::size_t k = 0; k <= points; ++k) {
            const double w = (k == 0 || k == points) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            k_inv += w * schedule.death_rate(times[k]) * std::exp(nus[k] - L);
        }
        k_inv *= h / 3.0;
    }
    SurvivalApprox out{};
    out.exact = std::exp(-z[0]) / z[1];
    out.l_value = L;
    out.k_tau = k_inv > 0.0 ? 1.0 / k_inv : std::numeric_limits<double>::infinity();
    out.approx = out.k_tau * std::exp(-L);
    out.ratio = out.exact / out.approx;
    out.applicable = L >= kLargeL;
    return out;
}

}  // namespace branchlab
