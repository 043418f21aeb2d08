#include "engine/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "engine/errors.hpp"

namespace engine::stochastics {

namespace {

constexpr double kThetaIndependence = 1e-8;

// Conditional CDF of v given u for the AMH copula:
//   C(u,v)   = u v / (1 - theta (1-u)(1-v))
//   dC/du    = v (1 - theta (1-v)) / (1 - theta (1-u)(1-v))^2
double amh_conditional_cdf(double theta, double u, double v) {
    const double den = 1.0 - theta * (1.0 - u) * (1.0 - v);
    return v * (1.0 - theta * (1.0 - v)) / (den * den);
}

double amh_conditional_quantile(double theta, double u, double w) {
    double lo = 0.0, hi = 1.0;
    // bisection; the conditional CDF is monotone in v
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (amh_conditional_cdf(theta, u, mid) < w) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double frank_conditional_quantile(double theta, double u, double w) {
    if (std::abs(theta) < kThetaIndependence) return w;
    // Solve dC/du = w for v:
    //   y = e^{-theta v} - 1 = w (e^{-theta} - 1) / (e^{-theta u}(1-w) + w)
    const double emtu = std::exp(-theta * u);
    const double y = w * std::expm1(-theta) / (emtu * (1.0 - w) + w);
    double v = -std::log1p(y) / theta;
    if (v <= 0.0) v = std::nextafter(0.0, 1.0);
    if (v >= 1.0) v = std::nextafter(1.0, 0.0);
    return v;
}

} // namespace

void CopulaSpec::validate() const {
    if (!std::isfinite(theta)) throw ParameterError("copula theta must be finite");
    switch (family) {
    case Family::amh:
        if (theta < -1.0 || theta >= 1.0) throw ParameterError("AMH theta must lie in [-1, 1)");
        break;
    case Family::frank:
        // theta == 0 handled as the independence limit
        if (std::abs(theta) > 600.0) throw ParameterError("Frank theta too large for stable evaluation");
        break;
    }
}

double conditional_quantile(const CopulaSpec& spec, double u, double w) {
    spec.validate();
    if (!(u > 0.0 && u < 1.0) || !(w > 0.0 && w < 1.0)) {
        throw ParameterError("conditional_quantile: u, w must be in (0,1)");
    }
    switch (spec.family) {
    case CopulaSpec::Family::amh:
        if (std::abs(spec.theta) < kThetaIndependence) return w;
        return amh_conditional_quantile(spec.theta, u, w);
    case CopulaSpec::Family::frank:
        return frank_conditional_quantile(spec.theta, u, w);
    }
    throw ParameterError("unknown copula family");
}

std::pair<double, double> sample_copula_pair(const CopulaSpec& spec, rng::RandomStream& stream) {
    const double u = stream.uniform();
    const double w = stream.uniform();
    return {u, conditional_quantile(spec, u, w)};
}

std::vector<double> rank_uniforms(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> u(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // midrank for ties keeps the result independent of input order
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) {
            u[order[k]] = (midrank - 0.5) / static_cast<double>(n);
        }
        i = j + 1;
    }
    return u;
}

std::vector<double> couple_latent(std::span<const double> existing, const CopulaSpec& spec,
                                  rng::RandomStream& stream) {
    if (existing.empty()) throw DegenerateInputError("couple_feature: existing values must be nonempty");
    spec.validate();
    const std::vector<double> u = rank_uniforms(existing);
    std::vector<double> v(existing.size());
    for (std::size_t i = 0; i < existing.size(); ++i) {
        auto sub = stream.child(rng::Scope::couple, i);
        v[i] = conditional_quantile(spec, u[i], sub.uniform());
    }
    return v;
}

std::vector<double> couple_feature(std::span<const double> existing,
                                   const std::function<double(std::size_t, double)>& target_quantile,
                                   const CopulaSpec& spec, rng::RandomStream& stream) {
    std::vector<double> v = couple_latent(existing, spec, stream);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = target_quantile(i, v[i]);
    return out;
}

std::vector<double> couple_feature(std::span<const double> existing, const DistributionSpec& target,
                                   const CopulaSpec& spec, rng::RandomStream& stream) {
    target.validate();
    return couple_feature(
        existing, [&](std::size_t, double v) { return quantile(target, v); }, spec, stream);
}

} // namespace engine::stochastics
