#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace branchlab {

using ScalarFn = std::function<double(double)>;

struct Extremum {
    double value;
    double arg;
};

Extremum minimize(const ScalarFn& f, double lo, double hi);
Extremum maximize(const ScalarFn& f, double lo, double hi);

// Bisection on [lo, hi]; f(lo) and f(hi) must differ in sign.
double bisect_root(const ScalarFn& f, double lo, double hi, double abs_tol);

// Composite Simpson; an odd panel count is rounded up.
double simpson(const ScalarFn& f, double lo, double hi, std::size_t panels);

// Cumulative Simpson values at lo + k*(hi-lo)/cells, k = 0..cells.
// Each cell is split into panels_per_cell Simpson panels (must be even).
std::vector<double> cumulative_simpson(const ScalarFn& f, double lo, double hi, std::size_t cells,
                                       std::size_t panels_per_cell);

struct QuadResult {
    double value;
    double error;
};

// Adaptive Gauss-Kronrod over [lo, hi], splitting at the given breakpoints.
QuadResult integrate(const ScalarFn& f, double lo, double hi, std::span<const double> breakpoints = {});

double median(std::vector<double> v);

// Least-squares slope of y on x.
double ls_slope(std::span<const double> x, std::span<const double> y);

// Two-sided one-sample Kolmogorov-Smirnov test against a continuous cdf.
struct KsResult {
    double statistic;
    double p_value;
};
KsResult ks_test(std::vector<double> sample, const ScalarFn& cdf);

// Pearson chi-square goodness of fit; bins with expected count < min_expected
// are pooled into their neighbours.
struct ChiSquareResult {
    double statistic;
    double dof;
    double p_value;
};
ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected,
                                double min_expected = 5.0);

double normal_cdf(double x);

}  // namespace branchlab
