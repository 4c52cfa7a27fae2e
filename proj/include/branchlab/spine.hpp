#pragma once

#include "branchlab/analytics.hpp"
#include "branchlab/estimator.hpp"
#include "branchlab/paths.hpp"
#include "branchlab/simulator.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace branchlab {

struct SpineSample {
    double s;
    double xi;
    double eta;
    bool is_birth;
};

struct SpineBirth {
    double time;
    double xi;
    double eta;
    std::string subtree_root;  // label of the child that left the spine
    std::uint64_t subtree_key;
    std::size_t subtree_size = 0;  // population of that subtree at tau
};

struct SpineRun {
    std::vector<SpineSample> spine_path;
    std::vector<double> spine_birth_times;
    std::vector<SpineBirth> births;
    std::size_t n_tau = 0;
    std::vector<PopulationSnapshot> tree;  // at the configured snapshot times
    std::string spine_label;
    double lambda = 0.0;
    double tau = 0.0;
    bool truncated = false;
    double int_a = 0.0;       // integral of a * eta^2 along the spine
    double int_two_r = 0.0;   // integral of 2 R(eta) along the spine
};

struct SpineConfig {
    SimConfig sim;  // horizon is replaced by tau; snapshot times must lie in [0, tau]
    bool simulate_subtrees = true;
};

SpineRun run_spine(const ModelParams& p, double lambda, State start, double tau, const SpineConfig& cfg,
                   std::uint64_t replica = 0);

// Mean of n_tau under the changed measure for a spine started at type y0.
double expected_spine_births(const ModelParams& p, double lambda, double y0, double tau);

double zeta_tilde(const ModelParams& p, double lambda, double xi, double eta, std::size_t n, double t);

// log zeta-tilde(t) along one line of descent under the original dynamics,
// following a uniformly chosen child at each branching.
double tagged_line_log_zeta(const ModelParams& p, double lambda, State start, double t, const SimConfig& cfg,
                            Stream& rng);

using TreeEvent = std::function<bool(std::span<const PopulationSnapshot>)>;

struct ISEstimate {
    EstimatorResult result;
    double log_weight_min = 0.0;
    double log_weight_median = 0.0;
    double log_weight_max = 0.0;
};

// Mean over changed-measure replicas of 1_event * Z+(0) / Z+(tau).
ISEstimate importance_estimate(const ModelParams& p, double lambda, const TreeEvent& event, double tau, State start,
                               std::size_t replicas, const SpineConfig& cfg);

struct ShortClimbSpec {
    double epsilon;
    double delta;
    double t;
    double beta;
    double kappa;
};

// Ascent window and paths for a short-climb setup: lambda_bar_ascent, tau from the clock.
OptimalAscent short_climb_paths(const ModelParams& p, const ShortClimbSpec& spec);

// `grid` holds the tree at times 0 = s_0 < ... < s_K = tau.
bool short_climb_indicator(std::span<const PopulationSnapshot> grid, const ShortClimbSpec& spec,
                           const ModelParams& p);

struct SpineDecomposition {
    ExtReal sum_term;
    ExtReal spine_term;
};

SpineDecomposition spine_decomposition_value(const SpineRun& run, const ModelParams& p, double lambda);

}  // namespace branchlab
