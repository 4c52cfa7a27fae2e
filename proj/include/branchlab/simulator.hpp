#pragma once

#include "branchlab/analytics.hpp"
#include "branchlab/estimator.hpp"
#include "branchlab/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace branchlab {

// Ulam-Harris word; the root is the empty word and each child appends '1' or '2'.
std::string label_text(const std::string& word);
bool is_prefix(const std::string& ancestor, const std::string& word);

struct Particle {
    std::string label;
    double x;
    double y;
    double born_at;
};

struct PopulationSnapshot {
    double time = 0.0;
    std::vector<Particle> particles;
    bool truncated = false;
};

struct SimConfig {
    double h_max = 0.05;
    double c_step = 0.05;
    std::size_t cap = 1'000'000;
    double horizon = 1.0;
    std::vector<double> snapshot_times;  // empty means {horizon}
    std::uint64_t seed = 1;

    void validate() const;
    std::vector<double> resolved_snapshot_times() const;
};

struct State {
    double x = 0.0;
    double y = 0.0;
};

// When branched, the split happens at branch_offset into the step, at the
// point at_branch drawn from the bridge between the two step ends.
struct StepResult {
    double x;
    double y;
    bool branched;
    double branch_offset;
    State at_branch;
};

// Bridge sample at offset u in a step of length h. The type is an OU with
// mean reversion k and stationary variance var_inf; the spatial increment
// is Brownian with total variance x_var over the step.
State bridge_point(State from, State to, double u, double h, double k, double var_inf, double x_var, Stream& rng);

// Offset of the first event in [0, h] for a rate conditioned on firing there.
double conditioned_event_time(double rate, double h, Stream& rng);

// Largest step allowed at type y by the adaptive contract.
double adaptive_step(const ModelParams& p, double y, double h_max, double c_step, double rate_multiplier = 1.0);

StepResult advance_particle(const ModelParams& p, State state, double h, double h_max, double c_step, Stream& rng);

// One tree from a single ancestor; snapshots are ordered by time and the
// particles inside each snapshot by label.
std::vector<PopulationSnapshot> run(const ModelParams& p, State start, const SimConfig& cfg,
                                    std::uint64_t replica = 0);

// Same as run() but starting from an arbitrary labelled particle with its own
// stream key, at time t0. Used to grow subtrees off a spine.
std::vector<PopulationSnapshot> run_subtree(const ModelParams& p, const Particle& root, std::uint64_t key,
                                            std::span<const double> snapshot_times, const SimConfig& cfg);

std::size_t count_region(const PopulationSnapshot& snap, double gamma, std::optional<double> kappa,
                         std::optional<std::pair<double, double>> type_window);

struct Extremes {
    double min_x;
    double max_x;
    double max_abs_y;
};
Extremes extremes(const PopulationSnapshot& snap);

using PointFn = std::function<double(double x, double y)>;

EstimatorResult mckean_product(const ModelParams& p, const PointFn& f, double t, State start,
                               std::size_t replicas, const SimConfig& cfg);

}  // namespace branchlab
