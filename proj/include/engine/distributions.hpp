#pragma once

#include <vector>

#include "engine/rng.hpp"

namespace engine::stochastics {

// Parametric family plus parameters for one scalar generator. The meaning of
// a/b depends on the family:
//   normal(mu, sd), uniform(lo, hi), poisson(lambda), gamma(shape, rate),
//   exponential(rate), bernoulli(p).
// multinomial draws an index from `probs`; weighted_set draws the matching
// entry of `values`.
struct DistributionSpec {
    enum class Family { normal, uniform, poisson, gamma, exponential, bernoulli, multinomial, weighted_set };

    Family family = Family::normal;
    double a = 0.0;
    double b = 1.0;
    std::vector<double> probs;
    std::vector<double> values;

    void validate() const;

    static DistributionSpec normal(double mu, double sd) { return {Family::normal, mu, sd, {}, {}}; }
    static DistributionSpec uniform(double lo, double hi) { return {Family::uniform, lo, hi, {}, {}}; }
    static DistributionSpec poisson(double lambda) { return {Family::poisson, lambda, 0.0, {}, {}}; }
    static DistributionSpec gamma(double shape, double rate) { return {Family::gamma, shape, rate, {}, {}}; }
    static DistributionSpec exponential(double rate) { return {Family::exponential, rate, 0.0, {}, {}}; }
    static DistributionSpec bernoulli(double p) { return {Family::bernoulli, p, 0.0, {}, {}}; }
    static DistributionSpec multinomial(std::vector<double> probs) {
        return {Family::multinomial, 0.0, 0.0, std::move(probs), {}};
    }
    static DistributionSpec weighted_set(std::vector<double> values, std::vector<double> probs) {
        return {Family::weighted_set, 0.0, 0.0, std::move(probs), std::move(values)};
    }
};

// One draw from the given distribution. Validates parameters.
double sample_scalar(const DistributionSpec& dist, rng::RandomStream& stream);

// Inverse CDF at u in (0, 1). Discrete families return the smallest support
// point whose CDF reaches u, which is also how sample_scalar draws them, so
// sample_scalar(d, s) == quantile(d, s.uniform()) for every family.
double quantile(const DistributionSpec& dist, double u);

// Standard normal quantile (Wichura's PPND16 rational approximation).
double normal_quantile(double p);

// Smallest k with P(Poisson(lambda) <= k) >= u.
int poisson_quantile(double lambda, double u);

// Index draw from cumulative probabilities, ties broken toward the lower
// index: smallest k with cum[k] >= u.
std::size_t multinomial_index(const std::vector<double>& probs, double u);

double sample_gamma(double shape, double rate, rng::RandomStream& stream);

} // namespace engine::stochastics
