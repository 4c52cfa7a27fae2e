#pragma once

#include "branchlab/analytics.hpp"
#include "branchlab/estimator.hpp"
#include "branchlab/paths.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace branchlab {

struct RateSchedule {
    std::function<double(double)> birth_rate;
    std::function<double(double)> death_rate;
    double horizon;
};

RateSchedule constant_schedule(double birth, double death, double tau);

// birth rho + r y^2, death (1/2theta)(ydot + theta y/2)^2 + xdot^2/(2 a y^2)
RateSchedule ascent_schedule(const ModelParams& p, const OptimalAscent& ascent);

double nu(const RateSchedule& schedule, double s);

struct BDOutcome {
    double w_tau;
    double u_tau;
    double v_tau;
    double extinction_prob;
    double mean;
    double conditional_mean;
    double nu_tau;

    double pmf(std::size_t n) const;
    // P(M > n)
    double tail(std::size_t n) const;
    std::vector<double> pmf_table(std::size_t n_max) const;
};

BDOutcome outcome_distribution(const RateSchedule& schedule);

struct EmpiricalBD {
    std::vector<std::size_t> histogram;  // histogram[n] = replicas ending with n individuals
    std::size_t replicas;
    std::uint64_t seed;
    EstimatorResult mean;
    EstimatorResult extinction;
    EstimatorResult conditional_mean;
};

EmpiricalBD simulate_bd(const RateSchedule& schedule, std::uint64_t seed, std::size_t replicas,
                        std::size_t cells = 1024, double safety = 1.05);

struct SurvivalApprox {
    double exact;
    double approx;
    double k_tau;
    double l_value;
    double ratio;
    bool applicable;
};

inline constexpr double kLargeL = 5.0;

SurvivalApprox survival_approximation(const RateSchedule& schedule);

}  // namespace branchlab
