#include "branchlab/analytics.hpp"

#include "branchlab/error.hpp"

#include <cmath>
#include <sstream>

namespace branchlab {

namespace {

std::string describe(double theta, double a, double r, double rho)
{
    std::ostringstream os;
    os << "(theta=" << theta << ", a=" << a << ", r=" << r << ", rho=" << rho << ")";
    return os.str();
}

double sq(double x) { return x * x; }

}  // namespace

ModelParams validate_params(double theta, double a, double r, double rho)
{
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw Error(Errc::NonPositiveTheta, "theta must be positive " + describe(theta, a, r, rho));
    if (!(r >= 0.0) || !(rho >= 0.0) || !std::isfinite(r) || !std::isfinite(rho))
        throw Error(Errc::NegativeRate, "r and rho must be nonnegative " + describe(theta, a, r, rho));
    if (!(a > 0.0) || !std::isfinite(a))
        throw Error(Errc::NonPositiveA, "a must be positive " + describe(theta, a, r, rho));
    if (!(theta > 8.0 * r))
        throw Error(Errc::LowTemperature, "need theta > 8r " + describe(theta, a, r, rho));
    return ModelParams{theta, a, r, rho};
}

ModelParams params_p0() { return validate_params(10.0, 1.0, 1.0, 1.0); }
ModelParams params_low_rho() { return validate_params(10.0, 1.0, 1.0, 0.1); }

const char* sign_name(Sign s) { return s == Sign::minus ? "minus" : "plus"; }

double SpectralQuantities::v_minus(double y) const { return std::exp(psi_minus * y * y); }
double SpectralQuantities::v_plus(double y) const { return std::exp(psi_plus * y * y); }

double lambda_min(const ModelParams& p)
{
    return -std::sqrt((p.theta - 8.0 * p.r) / (4.0 * p.a));
}

double mu_lambda(const ModelParams& p, double lambda)
{
    const double inner = p.theta - 8.0 * p.r - 4.0 * p.a * lambda * lambda;
    if (!(lambda <= 0.0) || !(inner > 0.0)) {
        std::ostringstream os;
        os << "lambda=" << lambda << " outside (" << lambda_min(p) << ", 0]";
        throw Error(Errc::LambdaOutOfRange, os.str());
    }
    return 0.5 * std::sqrt(p.theta * inner);
}

SpectralQuantities spectral(const ModelParams& p, double lambda)
{
    SpectralQuantities s{};
    s.lambda = lambda;
    s.mu = mu_lambda(p, lambda);
    s.psi_minus = 0.25 - s.mu / (2.0 * p.theta);
    s.psi_plus = 0.25 + s.mu / (2.0 * p.theta);
    s.e_minus = p.rho + p.theta * s.psi_minus;
    s.e_plus = p.rho + p.theta * s.psi_plus;
    if (lambda != 0.0) {
        s.c_minus = -s.e_minus / lambda;
        s.c_plus = -s.e_plus / lambda;
    }
    return s;
}

GrowthRateResult delta_gamma(const ModelParams& p, double gamma)
{
    if (!(gamma >= 0.0))
        throw Error(Errc::DomainError, "gamma must be nonnegative");
    const double k = p.theta - 8.0 * p.r;
    const double value = p.rho + p.theta / 4.0 - 0.25 * std::sqrt(k * (4.0 * gamma * gamma + p.theta * p.a) / p.a);
    const double lam = -gamma * std::sqrt(k / (p.theta * p.a * p.a + 4.0 * p.a * gamma * gamma));
    return {ExtReal(value), lam, gamma, 0.0};
}

GrowthRateResult delta_gamma_kappa(const ModelParams& p, double gamma, double kappa)
{
    if (!(gamma >= 0.0) || !(kappa >= 0.0))
        throw Error(Errc::DomainError, "gamma and kappa must be nonnegative");
    const double k = p.theta - 8.0 * p.r;
    const double th = p.theta, a = p.a, k2 = kappa * kappa;
    const double value = p.rho + (th - k2) / 4.0
                         - std::sqrt(th * k * (4.0 * a * th * gamma * gamma + a * a * sq(th + k2))) / (4.0 * th * a);
    const double lam = -gamma * std::sqrt(th * k / (a * a * sq(k2 + th) + 4.0 * a * gamma * gamma * th));
    return {ExtReal(value), lam, gamma, kappa};
}

double legendre_pair(const ModelParams& p, double x, LegendreDirection dir)
{
    const double k = p.theta - 8.0 * p.r;
    if (dir == LegendreDirection::gamma_to_lambda) {
        if (!(x > 0.0))
            throw Error(Errc::DomainError, "gamma must be positive");
        return -x * std::sqrt(k / (p.theta * p.a * p.a + 4.0 * p.a * x * x));
    }
    if (!(x < 0.0) || !(x > lambda_min(p)))
        throw Error(Errc::DomainError, "lambda must lie in (lambda_min, 0)");
    return std::sqrt(p.theta * p.a * p.a * x * x / (k - 4.0 * p.a * x * x));
}

WaveSpeed wave_speed(const ModelParams& p)
{
    const double k = p.theta - 8.0 * p.r;
    const double c = std::sqrt(2.0 * p.a * (p.r + p.rho + 2.0 * sq(2.0 * p.r + p.rho) / k));
    const double l = -std::sqrt(2.0 * k * (p.theta * p.rho + 2.0 * p.rho * p.rho + p.r * p.theta)
                                / (p.a * sq(p.theta + 4.0 * p.rho)));
    return {c, l};
}

ThetaCost theta_cost(const ModelParams& p, double beta, double kappa)
{
    if (!(beta >= 0.0) || !(kappa >= 0.0) || (beta == 0.0 && kappa == 0.0))
        throw Error(Errc::DomainError, "need beta, kappa >= 0, not both zero");
    const double k = p.theta - 8.0 * p.r;
    const double th = p.theta, a = p.a;
    const double inner = a * a * std::pow(kappa, 4) + 4.0 * a * th * beta * beta;
    const double value = kappa * kappa / 4.0 + std::sqrt(th * k * inner) / (4.0 * a * th);
    const double lam = -beta * std::sqrt(th * k / inner);
    return {value, lam};
}

Split optimal_split(const ModelParams& p, double gamma, double kappa)
{
    if (!(gamma > 0.0) || !(kappa >= 0.0))
        throw Error(Errc::DomainError, "need gamma > 0 and kappa >= 0");
    const double d = p.theta + kappa * kappa;
    return {gamma * p.theta / d, gamma * kappa * kappa / d};
}

ExtReal growth_rate_D(const ModelParams& p, double gamma, double kappa)
{
    constexpr double boundary_tol = 1e-9;
    if (kappa == 0.0) {
        if (gamma >= wave_speed(p).c_tilde)
            return ExtReal::neg_inf();
        return delta_gamma(p, gamma).value;
    }
    const double d = delta_gamma_kappa(p, gamma, kappa).value.value();
    if (std::abs(d) <= boundary_tol) {
        std::ostringstream os;
        os << "Delta(" << gamma << "," << kappa << ") = " << d << " is on the boundary";
        throw Error(Errc::BoundaryCase, os.str());
    }
    return d > 0.0 ? ExtReal(d) : ExtReal::neg_inf();
}

double martingale_decay_rate(const ModelParams& p, double lambda, Sign sign)
{
    if (!(lambda < 0.0))
        throw Error(Errc::LambdaOutOfRange, "decay rate needs lambda in (lambda_min, 0)");
    const auto s = spectral(p, lambda);
    const auto w = wave_speed(p);
    const double c_star = lambda <= w.lambda_tilde ? w.c_tilde : *s.c_minus;
    const double c = sign == Sign::minus ? *s.c_minus : *s.c_plus;
    return lambda * (c - c_star);
}

namespace numeric {

namespace {

double e_minus_of(const ModelParams& p, double lambda) { return spectral(p, lambda).e_minus; }

}  // namespace

Extremum delta_gamma(const ModelParams& p, double gamma)
{
    return minimize([&](double l) { return e_minus_of(p, l) + l * gamma; }, lambda_min(p) + edge, -edge);
}

Extremum delta_gamma_kappa(const ModelParams& p, double gamma, double kappa)
{
    return minimize(
        [&](double l) {
            const auto s = spectral(p, l);
            return s.e_minus + l * gamma - kappa * kappa * s.psi_plus;
        },
        lambda_min(p) + edge, -edge);
}

Extremum theta_cost(const ModelParams& p, double beta, double kappa)
{
    // psi+ has a square-root edge at lambda_min; search in u with lambda = lambda_min + u^2.
    const double lm = lambda_min(p);
    auto lam = [lm](double u) { return std::min(lm + u * u, 0.0); };
    auto m = maximize([&](double u) { return kappa * kappa * spectral(p, lam(u)).psi_plus - lam(u) * beta; }, 0.0,
                      std::sqrt(-lm));
    m.arg = lam(m.arg);
    return m;
}

Extremum min_wave_speed(const ModelParams& p)
{
    return minimize([&](double l) { return -e_minus_of(p, l) / l; }, lambda_min(p) + edge, -edge);
}

Extremum e_minus_dual(const ModelParams& p, double lambda)
{
    auto f = [&](double g) {
        const double k = p.theta - 8.0 * p.r;
        const double d = p.rho + p.theta / 4.0 - 0.25 * std::sqrt(k * (4.0 * g * g + p.theta * p.a) / p.a);
        return d - g * lambda;
    };
    double hi = 1.0;
    while (f(2.0 * hi) > f(hi) && hi < 1e8)
        hi *= 2.0;
    return maximize(f, 0.0, 2.0 * hi);
}

}  // namespace numeric

}  // namespace branchlab
