#include "branchlab/martingale.hpp"

#include "branchlab/error.hpp"
#include "branchlab/numerics.hpp"

#include <cmath>
#include <numbers>

namespace branchlab {

ExtReal log_z(std::span<const Particle> particles, double t, const ModelParams& p, double lambda, Sign sign)
{
    if (particles.empty())
        return ExtReal::neg_inf();
    const auto s = spectral(p, lambda);
    const double psi = s.psi(sign), e = s.e(sign);
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(particles.size());
    for (const auto& q : particles) {
        const double v = psi * q.y * q.y + lambda * q.x - e * t;
        terms.push_back(v);
        top = std::max(top, v);
    }
    double acc = 0.0;
    for (double v : terms)
        acc += std::exp(v - top);
    return ExtReal(top + std::log(acc));
}

double z_value(const PopulationSnapshot& snap, const ModelParams& p, double lambda, Sign sign)
{
    if (snap.particles.empty())
        throw Error(Errc::EmptySnapshot, "martingale of an empty snapshot");
    return log_z(snap.particles, snap.time, p, lambda, sign).value();
}

MartingaleSeries build_series(std::span<const PopulationSnapshot> snaps, const ModelParams& p, double lambda,
                              Sign sign, bool normalize)
{
    MartingaleSeries out{lambda, sign, {}, normalize};
    std::optional<double> base;
    for (const auto& snap : snaps) {
        if (snap.truncated)
            continue;
        const double v = z_value(snap, p, lambda, sign);
        if (!base)
            base = v;
        out.samples.push_back({snap.time, normalize ? v - *base : v});
    }
    return out;
}

double decay_slope(const MartingaleSeries& series, double t_lo, double t_hi)
{
    std::vector<double> t, v;
    for (const auto& s : series.samples)
        if (s.time >= t_lo && s.time <= t_hi) {
            t.push_back(s.time);
            v.push_back(s.log_value);
        }
    if (t.size() < 3)
        throw Error(Errc::InsufficientData, "decay fit needs at least 3 samples in the window");
    return ls_slope(t, v);
}

double f0_constant(const ModelParams& p, const std::function<double(double)>& f, double alpha, double lambda,
                   std::span<const double> breakpoints, double f_bound)
{
    if (!(alpha < 0.25))
        throw Error(Errc::AlphaOutOfRange, "alpha must be below 1/4");
    const auto w = wave_speed(p);
    if (!(lambda > w.lambda_tilde && lambda <= 0.0))
        throw Error(Errc::LambdaOutOfRange, "f0 needs lambda in (lambda_tilde, 0]");
    const auto s = spectral(p, lambda);
    const double c = 0.5 - alpha - s.psi_minus;
    // Tail mass beyond |y| = Y is at most f_bound * erfc(Y sqrt(c)) / sqrt(2c).
    double Y = 1.0;
    while (std::max(f_bound, 1.0) * std::erfc(Y * std::sqrt(c)) / std::sqrt(2.0 * c) > 1e-15)
        Y *= 1.5;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto integrand = [&](double y) { return f(y) * std::exp(-c * y * y) * norm; };
    const double integral = integrate(integrand, -Y, Y, breakpoints).value;
    return std::pow(s.mu / p.theta, 0.25) * integral;
}

RatioCheck ratio_limit_check(std::span<const std::vector<PopulationSnapshot>> runs, const ModelParams& p,
                             const std::function<double(double)>& f, double alpha, double lambda,
                             std::optional<double> window, std::span<const double> breakpoints)
{
    RatioCheck out{};
    out.f0 = f0_constant(p, f, alpha, lambda, breakpoints);
    const auto s = spectral(p, lambda);
    const double gamma_l = lambda < 0.0 ? legendre_pair(p, lambda, LegendreDirection::lambda_to_gamma) : 0.0;
    std::size_t discarded = 0;
    for (const auto& run : runs) {
        const PopulationSnapshot* last = nullptr;
        for (const auto& snap : run)
            if (!snap.truncated && snap.time > 0.0)
                last = &snap;
        if (!last) {
            ++discarded;
            continue;
        }
        const double t = last->time;
        const double log_den = z_value(*last, p, lambda, Sign::minus);
        double num = 0.0;
        for (const auto& q : last->particles) {
            if (window && !(std::abs(q.x / t + gamma_l) < *window))
                continue;
            const double fy = f(q.y);
            if (fy == 0.0)
                continue;
            num += fy * std::exp(alpha * q.y * q.y + lambda * q.x - s.e_minus * t - log_den);
        }
        out.ratios.push_back(num);
    }
    out.summary = summarize(out.ratios, 0);
    out.summary.discarded = discarded;
    out.median = out.ratios.empty() ? 0.0 : median(out.ratios);
    return out;
}

}  // namespace branchlab
