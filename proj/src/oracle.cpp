#include "branchlab/oracle.hpp"

#include "branchlab/error.hpp"
#include "branchlab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace branchlab {

PathIntegrals sample_single_particle(const ModelParams& p, const SingleParticleLaw& law, State start, double t,
                                     const OracleConfig& cfg, Stream& rng)
{
    if (!(law.ou_rate > 0.0))
        throw Error(Errc::DomainError, "OU rate must be positive");
    const double stat_var = p.theta / (2.0 * law.ou_rate);
    double s = 0.0, y = start.y, int_r = 0.0, int_a = 0.0;
    while (s < t) {
        double h = adaptive_step(p, y, cfg.h_max, cfg.c_step);
        const bool last = h >= t - s;
        if (last)
            h = t - s;
        const double decay = std::exp(-law.ou_rate * h);
        const double y1 = y * decay + std::sqrt(stat_var * -std::expm1(-2.0 * law.ou_rate * h)) * rng.normal();
        const double ysq = 0.5 * (y * y + y1 * y1);
        int_r += h * (p.rho + p.r * ysq);
        int_a += h * p.a * ysq;
        y = y1;
        s = last ? t : s + h;
    }
    const double xi = start.x + law.spatial_drift * int_a + std::sqrt(int_a) * rng.normal();
    return {xi, y, int_r, int_a};
}

namespace {

OracleEstimate finish(std::vector<double> values, std::vector<double> weights, const OracleConfig& cfg)
{
    OracleEstimate out;
    out.result = summarize(values, cfg.seed);
    if (!weights.empty()) {
        double mean = 0.0, mx = 0.0;
        for (double w : weights) {
            mean += w;
            mx = std::max(mx, w);
        }
        mean /= static_cast<double>(weights.size());
        out.max_weight_ratio = mean > 0.0 ? mx / mean : 0.0;
        out.unbounded_weight = out.max_weight_ratio > 1e4;
    }
    out.result.flagged = out.unbounded_weight;
    return out;
}

}  // namespace

OracleEstimate many_to_one_expectation(const ModelParams& p, const BoundedFn& f, double t, State start,
                                       std::size_t replicas, const OracleConfig& cfg)
{
    const SingleParticleLaw law{p.theta / 2.0, 0.0};
    auto pairs = parallel_map(replicas, [&](std::size_t i) {
        Stream rng(replica_key(cfg.seed, i));
        const auto path = sample_single_particle(p, law, start, t, cfg, rng);
        const double w = std::exp(path.int_r);
        return std::pair{w * f.f(path.xi, path.eta), w};
    });
    std::vector<double> values, weights;
    for (auto& [v, w] : pairs) {
        values.push_back(v);
        weights.push_back(w);
    }
    return finish(std::move(values), std::move(weights), cfg);
}

OracleEstimate transformed_expectation(const ModelParams& p, double lambda, const BoundedFn& f, double t,
                                       State start, std::size_t replicas, const OracleConfig& cfg)
{
    if (!(lambda < 0.0))
        throw Error(Errc::LambdaOutOfRange, "transformed expectation needs lambda in (lambda_min, 0)");
    const auto s = spectral(p, lambda);
    const SingleParticleLaw law{s.mu, lambda};
    auto pairs = parallel_map(replicas, [&](std::size_t i) {
        Stream rng(replica_key(cfg.seed, i));
        const auto path = sample_single_particle(p, law, start, t, cfg, rng);
        const double w = std::exp(-lambda * (path.xi - start.x) - s.psi_minus * (path.eta * path.eta - start.y * start.y)
                                  + s.e_minus * t);
        return std::pair{w * f.f(path.xi, path.eta), w};
    });
    std::vector<double> values, weights;
    for (auto& [v, w] : pairs) {
        values.push_back(v);
        weights.push_back(w);
    }
    return finish(std::move(values), std::move(weights), cfg);
}

double expected_population(const ModelParams& p, double t, double start_y)
{
    const auto s = spectral(p, 0.0);
    const double mu = s.mu, psi = s.psi_minus;
    const double m = start_y * std::exp(-mu * t);
    const double var = p.theta * -std::expm1(-2.0 * mu * t) / (2.0 * mu);
    const double d = 1.0 + 2.0 * psi * var;
    return std::exp(s.e_minus * t + psi * start_y * start_y - psi * m * m / d) / std::sqrt(d);
}

EstimatorResult drift_lln(const ModelParams& p, double lambda, double t, std::size_t replicas,
                          const OracleConfig& cfg)
{
    const auto s = spectral(p, lambda);
    const SingleParticleLaw law{s.mu, lambda};
    const double sd = std::sqrt(p.theta / (2.0 * s.mu));
    auto values = parallel_map(replicas, [&](std::size_t i) {
        Stream rng(replica_key(cfg.seed, i));
        const State start{0.0, sd * rng.normal()};
        return sample_single_particle(p, law, start, t, cfg, rng).xi / t;
    });
    return summarize(values, cfg.seed);
}

}  // namespace branchlab
