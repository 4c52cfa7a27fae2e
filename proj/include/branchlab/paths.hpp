#pragma once

#include "branchlab/analytics.hpp"

#include <functional>

namespace branchlab {

struct PathSample {
    double value;
    double derivative;
};

using PathSampler = std::function<PathSample(double)>;

// Wraps a plain function; the derivative is a central difference with step 1e-6 * tau.
PathSampler sampler_from_function(std::function<double(double)> f, double tau);

struct AscentSpec {
    double beta;
    double kappa;
    double t;
};

double tau_of_t(const ModelParams& p, double lambda_bar, double t);

struct OptimalAscent {
    AscentSpec spec;
    double tau;
    double lambda_used;
    double mu;
    PathSampler y_path;
    PathSampler x_path;
    // t(kappa^2 (1/4 + mu coth(mu tau) / (2 theta)) - lambda beta) - rho tau
    double cost;
};

OptimalAscent optimal_paths(const ModelParams& p, const AscentSpec& spec, double lambda, double tau);

// kappa^2 t (coth(mu tau)/(2 mu) - tau/(2 sinh^2(mu tau))), the integral of y^2 along the optimal y path.
double optimal_y_square_integral(const ModelParams& p, const AscentSpec& spec, double lambda, double tau);

double lambda_hat(const ModelParams& p, const AscentSpec& spec, double tau);

enum class FunctionalMode { at_s, sup };

struct PathFunctionalValue {
    double j_value;
    double l_value;
    double argmax_s;
    double quadrature_error_estimate;
};

inline constexpr std::size_t kDefaultPanels = 1u << 14;

// Integrand (1/2theta)(ydot + theta y/2)^2 + xdot^2/(2 a y^2) - r y^2 - rho.
double j_integrand(const ModelParams& p, PathSample x, PathSample y);

PathFunctionalValue functional_J(const ModelParams& p, const PathSampler& x_path, const PathSampler& y_path,
                                 double s, FunctionalMode mode, std::size_t panels = kDefaultPanels);

double ascent_cost_limit(const ModelParams& p, double beta, double kappa, double tau);

}  // namespace branchlab
