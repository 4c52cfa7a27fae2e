#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace branchlab {

struct EstimatorResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    std::size_t discarded = 0;
    bool flagged = false;

    double lo(double k = 3.0) const { return mean - k * std_error; }
    double hi(double k = 3.0) const { return mean + k * std_error; }
};

EstimatorResult summarize(std::span<const double> samples, std::uint64_t seed);

// |a - b| <= k * se, with the target treated as exact.
bool within_se(const EstimatorResult& e, double target, double k = 3.0);

// The k-sigma intervals of two independent estimates intersect.
bool intervals_overlap(const EstimatorResult& a, const EstimatorResult& b, double k = 3.0);

}  // namespace branchlab
