#include "branchlab/estimator.hpp"

#include "branchlab/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace branchlab {

unsigned worker_count()
{
    if (const char* env = std::getenv("BRANCHLAB_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0)
                return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

EstimatorResult summarize(std::span<const double> samples, std::uint64_t seed)
{
    EstimatorResult r;
    r.seed = seed;
    r.replicas = samples.size();
    if (samples.empty())
        return r;
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double x : samples) {
        ++k;
        const double d = x - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (x - mean);
    }
    r.mean = mean;
    if (k > 1)
        r.std_error = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
    return r;
}

bool within_se(const EstimatorResult& e, double target, double k)
{
    return std::abs(e.mean - target) <= k * e.std_error;
}

bool intervals_overlap(const EstimatorResult& a, const EstimatorResult& b, double k)
{
    return a.lo(k) <= b.hi(k) && b.lo(k) <= a.hi(k);
}

}  // namespace branchlab
