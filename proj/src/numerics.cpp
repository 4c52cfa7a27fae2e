#include "branchlab/numerics.hpp"

#include "branchlab/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace branchlab {

Extremum minimize(const ScalarFn& f, double lo, double hi)
{
    constexpr int bits = std::numeric_limits<double>::digits;
    std::uintmax_t max_iter = 500;
    auto [arg, value] = boost::math::tools::brent_find_minima(f, lo, hi, bits, max_iter);
    return {value, arg};
}

Extremum maximize(const ScalarFn& f, double lo, double hi)
{
    auto m = minimize([&](double x) { return -f(x); }, lo, hi);
    return {-m.value, m.arg};
}

double bisect_root(const ScalarFn& f, double lo, double hi, double abs_tol)
{
    std::uintmax_t max_iter = 400;
    auto tol = [abs_tol](double a, double b) { return std::abs(b - a) <= abs_tol; };
    auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol, max_iter);
    return 0.5 * (a + b);
}

double simpson(const ScalarFn& f, double lo, double hi, std::size_t panels)
{
    if (panels % 2 != 0)
        ++panels;
    const double h = (hi - lo) / static_cast<double>(panels);
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < panels; ++i) {
        double v = f(lo + h * static_cast<double>(i));
        (i % 2 ? odd : even) += v;
    }
    return h / 3.0 * (f(lo) + f(hi) + 4.0 * odd + 2.0 * even);
}

std::vector<double> cumulative_simpson(const ScalarFn& f, double lo, double hi, std::size_t cells,
                                       std::size_t panels_per_cell)
{
    if (panels_per_cell % 2 != 0)
        ++panels_per_cell;
    const std::size_t n = cells * panels_per_cell;
    const double h = (hi - lo) / static_cast<double>(n);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        values[i] = f(lo + h * static_cast<double>(i));

    std::vector<double> out(cells + 1, 0.0);
    double acc = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        const std::size_t base = c * panels_per_cell;
        double s = values[base] + values[base + panels_per_cell];
        for (std::size_t j = 1; j < panels_per_cell; ++j)
            s += (j % 2 ? 4.0 : 2.0) * values[base + j];
        acc += h / 3.0 * s;
        out[c + 1] = acc;
    }
    return out;
}

QuadResult integrate(const ScalarFn& f, double lo, double hi, std::span<const double> breakpoints)
{
    std::vector<double> knots{lo};
    for (double b : breakpoints)
        if (b > lo && b < hi)
            knots.push_back(b);
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());

    QuadResult total{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double err = 0.0;
        total.value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, knots[i], knots[i + 1], 15,
                                                                                     1e-14, &err);
        total.error += err;
    }
    return total;
}

double median(std::vector<double> v)
{
    if (v.empty())
        throw Error(Errc::InsufficientData, "median of an empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1)
        return hi;
    double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double ls_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw Error(Errc::InsufficientData, "slope needs at least two paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0)
        throw Error(Errc::InsufficientData, "slope needs distinct abscissae");
    return sxy / sxx;
}

namespace {

// Asymptotic Kolmogorov survival function Q(z) = 2 sum (-1)^{k-1} exp(-2 k^2 z^2).
double kolmogorov_q(double z)
{
    if (z < 0.27)
        return 1.0;
    if (z < 1.0) {
        // Small-z form from the Jacobi theta identity.
        const double w = std::exp(-M_PI * M_PI / (8.0 * z * z));
        const double s = w + std::pow(w, 9) + std::pow(w, 25) + std::pow(w, 49);
        return 1.0 - std::sqrt(2.0 * M_PI) / z * s;
    }
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * z * z);
        q += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-18)
            break;
    }
    return std::clamp(q, 0.0, 1.0);
}

}  // namespace

KsResult ks_test(std::vector<double> sample, const ScalarFn& cdf)
{
    if (sample.empty())
        throw Error(Errc::InsufficientData, "K-S test on an empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    const double sn = std::sqrt(n);
    const double z = (sn + 0.12 + 0.11 / sn) * d;
    return {d, kolmogorov_q(z)};
}

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected,
                                double min_expected)
{
    if (observed.size() != expected.size() || observed.empty())
        throw Error(Errc::InsufficientData, "chi-square needs matching nonempty bins");

    std::vector<double> obs, exp;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += observed[i];
        e_acc += expected[i];
        if (e_acc >= min_expected) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp.empty()) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
        } else {
            obs.back() += o_acc;
            exp.back() += e_acc;
        }
    }
    if (exp.size() < 2)
        throw Error(Errc::InsufficientData, "chi-square needs at least two pooled bins");

    double stat = 0.0;
    for (std::size_t i = 0; i < exp.size(); ++i)
        stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
    const double dof = static_cast<double>(exp.size() - 1);
    boost::math::chi_squared dist(dof);
    return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace branchlab
