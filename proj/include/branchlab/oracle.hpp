#pragma once

#include "branchlab/analytics.hpp"
#include "branchlab/estimator.hpp"
#include "branchlab/simulator.hpp"

#include <functional>

namespace branchlab {

// Type: d eta = -ou_rate * eta ds + sqrt(theta) dB. Space: xi = W(int A(eta)) with
// W a Brownian motion of drift spatial_drift.
struct SingleParticleLaw {
    double ou_rate;
    double spatial_drift;
};

struct BoundedFn {
    std::function<double(double x, double y)> f;
    double bound = 1.0;
};

struct OracleConfig {
    double h_max = 0.05;
    double c_step = 0.05;
    std::uint64_t seed = 1;
};

struct PathIntegrals {
    double xi;
    double eta;
    double int_r;
    double int_a;
};

// One single-particle path to time t; R and A are integrated by the trapezoid
// rule on the adaptive grid h = min(h_max, c_step / R(eta)).
PathIntegrals sample_single_particle(const ModelParams& p, const SingleParticleLaw& law, State start, double t,
                                     const OracleConfig& cfg, Stream& rng);

struct OracleEstimate {
    EstimatorResult result;
    bool unbounded_weight = false;
    double max_weight_ratio = 0.0;
};

OracleEstimate many_to_one_expectation(const ModelParams& p, const BoundedFn& f, double t, State start,
                                       std::size_t replicas, const OracleConfig& cfg);

OracleEstimate transformed_expectation(const ModelParams& p, double lambda, const BoundedFn& f, double t,
                                       State start, std::size_t replicas, const OracleConfig& cfg);

double expected_population(const ModelParams& p, double t, double start_y);

// Sample mean of xi_t / t under P_{mu_lambda, lambda} from a stationary type.
EstimatorResult drift_lln(const ModelParams& p, double lambda, double t, std::size_t replicas,
                          const OracleConfig& cfg);

}  // namespace branchlab
