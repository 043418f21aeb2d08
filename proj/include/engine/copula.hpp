#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "engine/distributions.hpp"
#include "engine/rng.hpp"

namespace engine::stochastics {

// Bivariate copula: Ali-Mikhail-Haq (theta in [-1, 1)) or Frank (theta != 0,
// finite). theta == 0 for Frank is accepted and treated as the independence
// limit.
struct CopulaSpec {
    enum class Family { amh, frank };

    Family family = Family::frank;
    double theta = 0.0;

    void validate() const;

    static CopulaSpec amh(double theta) { return {Family::amh, theta}; }
    static CopulaSpec frank(double theta) { return {Family::frank, theta}; }
};

// v such that C(v | u) = w, i.e. the inverse of the conditional CDF given u.
// Frank uses the closed-form inverse; AMH is inverted numerically by
// bisection to 1e-10.
double conditional_quantile(const CopulaSpec& spec, double u, double w);

// One (u, v) pair with Uniform(0,1) marginals and the requested dependence,
// sampled by conditional inversion.
std::pair<double, double> sample_copula_pair(const CopulaSpec& spec, rng::RandomStream& stream);

// Generates a new feature coupled to an already-generated one. u_i is the
// midrank-based pseudo-uniform of existing[i], v_i is drawn from the copula
// conditional on u_i using the substream child(couple, i), and the result is
// the target quantile at v_i. The overload taking a quantile callable allows
// per-element target marginals.
std::vector<double> couple_feature(std::span<const double> existing, const DistributionSpec& target,
                                   const CopulaSpec& spec, rng::RandomStream& stream);

std::vector<double> couple_feature(std::span<const double> existing,
                                   const std::function<double(std::size_t, double)>& target_quantile,
                                   const CopulaSpec& spec, rng::RandomStream& stream);

// Latent conditional uniforms only (no marginal inversion): v_i | u_i where
// u_i comes from the ranks of existing[i].
std::vector<double> couple_latent(std::span<const double> existing, const CopulaSpec& spec,
                                  rng::RandomStream& stream);

// Midrank-based pseudo-uniforms in (0,1): (midrank - 0.5) / n.
std::vector<double> rank_uniforms(std::span<const double> values);

} // namespace engine::stochastics
