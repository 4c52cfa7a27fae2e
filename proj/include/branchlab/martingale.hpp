#pragma once

#include "branchlab/analytics.hpp"
#include "branchlab/estimator.hpp"
#include "branchlab/simulator.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace branchlab {

// log Z^{+-}_lambda(t) over the given particles, t the common time.
ExtReal log_z(std::span<const Particle> particles, double t, const ModelParams& p, double lambda, Sign sign);

// log Z of a whole snapshot; throws EmptySnapshot when it is empty.
double z_value(const PopulationSnapshot& snap, const ModelParams& p, double lambda, Sign sign);

struct SeriesSample {
    double time;
    double log_value;
};

struct MartingaleSeries {
    double lambda;
    Sign sign;
    std::vector<SeriesSample> samples;
    bool normalized;
};

// Truncated snapshots are skipped.
MartingaleSeries build_series(std::span<const PopulationSnapshot> snaps, const ModelParams& p, double lambda,
                              Sign sign, bool normalize);

double decay_slope(const MartingaleSeries& series, double t_lo, double t_hi);

double f0_constant(const ModelParams& p, const std::function<double(double)>& f, double alpha, double lambda,
                   std::span<const double> breakpoints = {}, double f_bound = 1.0);

struct RatioCheck {
    EstimatorResult summary;
    double median;
    double f0;
    std::vector<double> ratios;
};

// One ratio per run at its latest non-truncated snapshot. With a window,
// the numerator only keeps particles with |X/t + gamma_lambda| < window.
RatioCheck ratio_limit_check(std::span<const std::vector<PopulationSnapshot>> runs, const ModelParams& p,
                             const std::function<double(double)>& f, double alpha, double lambda,
                             std::optional<double> window = std::nullopt,
                             std::span<const double> breakpoints = {});

}  // namespace branchlab
