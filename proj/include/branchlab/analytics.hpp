#pragma once

#include "branchlab/extreal.hpp"
#include "branchlab/numerics.hpp"

#include <optional>

namespace branchlab {

struct ModelParams {
    double theta;
    double a;
    double r;
    double rho;
};

ModelParams validate_params(double theta, double a, double r, double rho);

// theta=10, a=1, r=1, rho=1
ModelParams params_p0();
// theta=10, a=1, r=1, rho=0.1
ModelParams params_low_rho();

enum class Sign { minus, plus };

const char* sign_name(Sign s);

struct SpectralQuantities {
    double lambda;
    double mu;
    double psi_minus;
    double psi_plus;
    double e_minus;
    double e_plus;
    std::optional<double> c_minus;
    std::optional<double> c_plus;

    double psi(Sign s) const { return s == Sign::minus ? psi_minus : psi_plus; }
    double e(Sign s) const { return s == Sign::minus ? e_minus : e_plus; }
    double v_minus(double y) const;
    double v_plus(double y) const;
};

double lambda_min(const ModelParams& p);

// mu_lambda; throws LambdaOutOfRange outside (lambda_min, 0].
double mu_lambda(const ModelParams& p, double lambda);

SpectralQuantities spectral(const ModelParams& p, double lambda);

struct GrowthRateResult {
    ExtReal value;
    double argmin_lambda;
    double gamma;
    double kappa;
};

GrowthRateResult delta_gamma(const ModelParams& p, double gamma);
GrowthRateResult delta_gamma_kappa(const ModelParams& p, double gamma, double kappa);

enum class LegendreDirection { gamma_to_lambda, lambda_to_gamma };
double legendre_pair(const ModelParams& p, double x, LegendreDirection dir);

struct WaveSpeed {
    double c_tilde;
    double lambda_tilde;
};
WaveSpeed wave_speed(const ModelParams& p);

struct ThetaCost {
    double theta_bk;
    double lambda_bar_ascent;
};
ThetaCost theta_cost(const ModelParams& p, double beta, double kappa);

struct Split {
    double alpha_bar;
    double beta_bar;
};
Split optimal_split(const ModelParams& p, double gamma, double kappa);

ExtReal growth_rate_D(const ModelParams& p, double gamma, double kappa);

double martingale_decay_rate(const ModelParams& p, double lambda, Sign sign);

// Direct numeric optimization of the variational formulas, independent of
// the closed forms above.
namespace numeric {

inline constexpr double edge = 1e-9;

Extremum delta_gamma(const ModelParams& p, double gamma);
Extremum delta_gamma_kappa(const ModelParams& p, double gamma, double kappa);
Extremum theta_cost(const ModelParams& p, double beta, double kappa);
Extremum min_wave_speed(const ModelParams& p);
// sup over gamma >= 0 of Delta(gamma) - gamma*lambda
Extremum e_minus_dual(const ModelParams& p, double lambda);

}  // namespace numeric

}  // namespace branchlab
