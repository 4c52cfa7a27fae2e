#include "branchlab/paths.hpp"

#include "branchlab/error.hpp"
#include "branchlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace branchlab {

namespace {

// sinh(z) - z without cancellation for small z.
double sinh_minus_id(double z)
{
    if (std::abs(z) < 1e-2) {
        const double z2 = z * z;
        return z * z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0 * (1.0 + z2 / 72.0)));
    }
    return std::sinh(z) - z;
}

// coth(z)/z - 1/sinh(z)^2
double q_of(double z)
{
    if (z < 1e-3) {
        const double z2 = z * z;
        return 2.0 / 3.0 - 4.0 * z2 / 45.0 + 4.0 * z2 * z2 / 315.0;
    }
    const double sh = std::sinh(z);
    return 1.0 / (std::tanh(z) * z) - 1.0 / (sh * sh);
}

double coth(double z) { return 1.0 / std::tanh(z); }

}  // namespace

PathSampler sampler_from_function(std::function<double(double)> f, double tau)
{
    const double step = 1e-6 * tau;
    return [f = std::move(f), step](double s) {
        return PathSample{f(s), (f(s + step) - f(s - step)) / (2.0 * step)};
    };
}

double tau_of_t(const ModelParams& p, double lambda_bar, double t)
{
    if (!(lambda_bar < 0.0))
        throw Error(Errc::LambdaOutOfRange, "clock needs lambda in (lambda_min, 0)");
    const double mu = mu_lambda(p, lambda_bar);
    const double z = 2.0 * mu * t / p.theta;
    return z > 1.0 ? std::log(z) / (2.0 * mu) : 0.0;
}

double optimal_y_square_integral(const ModelParams& p, const AscentSpec& spec, double lambda, double tau)
{
    const double mu = mu_lambda(p, lambda);
    return spec.kappa * spec.kappa * spec.t * 0.5 * tau * q_of(mu * tau);
}

OptimalAscent optimal_paths(const ModelParams& p, const AscentSpec& spec, double lambda, double tau)
{
    if (!(tau > 0.0))
        throw Error(Errc::DegenerateTau, "ascent duration must be positive");
    if (!(lambda < 0.0))
        throw Error(Errc::LambdaOutOfRange, "optimal paths need lambda in (lambda_min, 0)");
    const double mu = mu_lambda(p, lambda);
    const double top = spec.kappa * std::sqrt(spec.t);
    const double sh = std::sinh(mu * tau);
    const double den = sinh_minus_id(2.0 * mu * tau);
    const double bt = spec.beta * spec.t;

    OptimalAscent out{spec, tau, lambda, mu, {}, {}, 0.0};
    out.y_path = [=](double s) {
        if (s >= tau)
            return PathSample{top, top * mu * std::cosh(mu * tau) / sh};
        return PathSample{top * std::sinh(mu * s) / sh, top * mu * std::cosh(mu * s) / sh};
    };
    out.x_path = [=](double s) {
        if (s >= tau)
            return PathSample{-bt, -bt * 2.0 * mu * (std::cosh(2.0 * mu * tau) - 1.0) / den};
        const double z = 2.0 * mu * s;
        // cosh(z) - 1 = 2 sinh^2(z/2) keeps precision near s = 0
        const double sh_half = std::sinh(0.5 * z);
        return PathSample{-bt * sinh_minus_id(z) / den, -bt * 2.0 * mu * 2.0 * sh_half * sh_half / den};
    };
    out.cost = spec.t * (spec.kappa * spec.kappa * (0.25 + mu * coth(mu * tau) / (2.0 * p.theta)) - lambda * spec.beta)
               - p.rho * tau;
    return out;
}

double lambda_hat(const ModelParams& p, const AscentSpec& spec, double tau)
{
    if (!(tau > 0.0) || !(spec.beta > 0.0) || !(spec.kappa > 0.0))
        throw Error(Errc::DomainError, "lambda_hat needs tau, beta, kappa > 0");
    constexpr double eps = 1e-9;
    constexpr int scan = 256;
    const double lo = lambda_min(p) + eps, hi = -eps;
    const double k2 = spec.kappa * spec.kappa;
    auto g = [&](double l) {
        const double mu = mu_lambda(p, l);
        return -spec.beta / (p.a * l) - k2 * 0.5 * tau * q_of(mu * tau);
    };
    double prev_l = lo, prev_g = g(lo);
    for (int i = 1; i <= scan; ++i) {
        const double l = lo + (hi - lo) * static_cast<double>(i) / scan;
        const double gl = g(l);
        if ((prev_g < 0.0) != (gl < 0.0))
            return bisect_root(g, prev_l, l, 1e-12);
        prev_l = l;
        prev_g = gl;
    }
    std::ostringstream os;
    os << "no sign change of the lambda_hat equation on (lambda_min, 0) at tau=" << tau;
    throw Error(Errc::NoBracket, os.str());
}

double j_integrand(const ModelParams& p, PathSample x, PathSample y)
{
    const double type_part = (y.derivative + 0.5 * p.theta * y.value) * (y.derivative + 0.5 * p.theta * y.value)
                             / (2.0 * p.theta);
    double space_part = 0.0;
    if (y.value == 0.0) {
        if (x.derivative != 0.0)
            throw Error(Errc::SingularPath, "y vanishes where xdot is nonzero");
    } else {
        space_part = x.derivative * x.derivative / (2.0 * p.a * y.value * y.value);
    }
    return type_part + space_part - p.r * y.value * y.value - p.rho;
}

PathFunctionalValue functional_J(const ModelParams& p, const PathSampler& x_path, const PathSampler& y_path,
                                 double s, FunctionalMode mode, std::size_t panels)
{
    if (!(s >= 0.0))
        throw Error(Errc::DomainError, "J needs s >= 0");
    if (s == 0.0)
        return {0.0, 0.0, 0.0, 0.0};
    panels = std::max<std::size_t>(panels, 2);
    const std::size_t cells = std::min<std::size_t>(1024, panels / 2);
    const std::size_t per_cell = std::max<std::size_t>(2, (panels / cells) & ~std::size_t{1});

    auto integrand = [&](double w) {
        auto xs = x_path(w);
        const auto ys = y_path(w);
        if (w == 0.0 && ys.value == 0.0)
            xs.derivative = 0.0;
        return j_integrand(p, xs, ys);
    };
    const auto cum = cumulative_simpson(integrand, 0.0, s, cells, per_cell);
    const double coarse = cumulative_simpson(integrand, 0.0, s, cells, per_cell / 2 < 2 ? 2 : per_cell / 2).back();
    const double j = cum.back();
    const double err = per_cell >= 4 ? std::abs(j - coarse) / 15.0 : std::abs(j - coarse);

    const auto it = std::max_element(cum.begin(), cum.end());
    const std::size_t k = static_cast<std::size_t>(it - cum.begin());
    const double cell = s / static_cast<double>(cells);
    PathFunctionalValue out{j, *it, cell * static_cast<double>(k), err};
    if (mode == FunctionalMode::sup && k > 0 && k < cells) {
        const double left = cell * static_cast<double>(k - 1);
        auto J_at = [&](double w) { return cum[k - 1] + simpson(integrand, left, w, 2 * per_cell); };
        const auto m = maximize(J_at, left, cell * static_cast<double>(k + 1));
        if (m.value > out.l_value) {
            out.l_value = m.value;
            out.argmax_s = m.arg;
        }
    }
    out.l_value = std::max(out.l_value, 0.0);
    return out;
}

double ascent_cost_limit(const ModelParams& p, double beta, double kappa, double tau)
{
    if (!(tau > 0.0))
        throw Error(Errc::DomainError, "ascent cost needs tau > 0");
    const double k2 = kappa * kappa;
    if (beta == 0.0) {
        const double mu0 = mu_lambda(p, 0.0);
        return k2 * (0.25 + mu0 * coth(mu0 * tau) / (2.0 * p.theta));
    }
    const double l = lambda_hat(p, AscentSpec{beta, kappa, 1.0}, tau);
    const double mu = mu_lambda(p, l);
    return k2 * (0.25 + mu * coth(mu * tau) / (2.0 * p.theta)) - l * beta;
}

}  // namespace branchlab
