#include "engine/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "engine/errors.hpp"

namespace engine::stochastics {

namespace {

bool finite(double x) { return std::isfinite(x); }

void check(bool ok, const char* what) {
    if (!ok) throw ParameterError(std::string("invalid distribution parameter: ") + what);
}

void check_probs(const std::vector<double>& probs) {
    check(!probs.empty(), "probability vector must be nonempty");
    double sum = 0.0;
    for (double p : probs) {
        check(finite(p) && p >= 0.0 && p <= 1.0, "probabilities must lie in [0,1]");
        sum += p;
    }
    check(std::abs(sum - 1.0) <= 1e-9, "probabilities must sum to 1");
}

} // namespace

void DistributionSpec::validate() const {
    switch (family) {
    case Family::normal:
        check(finite(a) && finite(b) && b > 0.0, "normal sd must be positive");
        break;
    case Family::uniform:
        check(finite(a) && finite(b) && a <= b, "uniform bounds must satisfy lo <= hi");
        break;
    case Family::poisson:
        check(finite(a) && a >= 0.0 && a <= 5000.0, "poisson rate must be in [0, 5000]");
        break;
    case Family::gamma:
        check(finite(a) && a > 0.0, "gamma shape must be positive");
        check(finite(b) && b > 0.0, "gamma rate must be positive");
        break;
    case Family::exponential:
        check(finite(a) && a > 0.0, "exponential rate must be positive");
        break;
    case Family::bernoulli:
        check(finite(a) && a >= 0.0 && a <= 1.0, "bernoulli p must be in [0,1]");
        break;
    case Family::multinomial:
        check_probs(probs);
        break;
    case Family::weighted_set:
        check_probs(probs);
        check(values.size() == probs.size(), "weighted set needs one probability per value");
        break;
    }
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal_quantile: p must be in (0,1)");

    // Wichura (1988), algorithm AS 241, double-precision branch.
    static const double a[8] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static const double b[8] = {1.0,
                                4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                5.2264952788528545610e+3};
    static const double c[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                                5.76949722146069140550e0,  3.64784832476320460504e0,
                                1.27045825245236838258e0,  2.41780725177450611770e-1,
                                2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static const double d[8] = {1.0,
                                2.05319162663775882187e0,  1.67638483018380384940e0,
                                6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                1.05075007164441684324e-9};
    static const double e[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                                1.78482653991729133580e0,  2.96560571828504891230e-1,
                                2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static const double f[8] = {1.0,
                                5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                2.04426310338993978564e-15};

    auto poly = [](const double* k, double x) {
        return k[0] + x * (k[1] + x * (k[2] + x * (k[3] + x * (k[4] + x * (k[5] + x * (k[6] + x * k[7]))))));
    };
    auto polyb = [](const double* k, double x) {
        return 1.0 + x * (k[1] + x * (k[2] + x * (k[3] + x * (k[4] + x * (k[5] + x * (k[6] + x * k[7]))))));
    };

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, r) / polyb(b, r);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = poly(c, r) / polyb(d, r);
    } else {
        r -= 5.0;
        v = poly(e, r) / polyb(f, r);
    }
    return (q < 0.0) ? -v : v;
}

int poisson_quantile(double lambda, double u) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("poisson rate must be nonnegative");
    if (lambda == 0.0) return 0;
    if (lambda > 500.0) {
        // Normal approximation; exp(-lambda) underflows long before this.
        double x = lambda + std::sqrt(lambda) * normal_quantile(u);
        return x < 0.0 ? 0 : static_cast<int>(std::lround(x));
    }
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 100000) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return k;
}

std::size_t multinomial_index(const std::vector<double>& probs, double u) {
    double cum = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        cum += probs[k];
        if (u <= cum) return k;
    }
    return probs.size() - 1;
}

namespace {

double gamma_shape_ge1(double shape, rng::RandomStream& stream) {
    // Marsaglia & Tsang (2000) squeeze method.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = normal_quantile(stream.uniform());
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = stream.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

} // namespace

double sample_gamma(double shape, double rate, rng::RandomStream& stream) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw ParameterError("gamma shape and rate must be positive");
    if (shape < 1.0) {
        const double g = gamma_shape_ge1(shape + 1.0, stream);
        const double u = stream.uniform();
        return g * std::pow(u, 1.0 / shape) / rate;
    }
    return gamma_shape_ge1(shape, stream) / rate;
}

double quantile(const DistributionSpec& dist, double u) {
    dist.validate();
    if (!(u > 0.0 && u < 1.0)) throw ParameterError("quantile: u must be in (0,1)");
    switch (dist.family) {
    case DistributionSpec::Family::normal:
        return dist.a + dist.b * normal_quantile(u);
    case DistributionSpec::Family::uniform:
        return dist.a + (dist.b - dist.a) * u;
    case DistributionSpec::Family::poisson:
        return static_cast<double>(poisson_quantile(dist.a, u));
    case DistributionSpec::Family::exponential:
        return -std::log1p(-u) / dist.a;
    case DistributionSpec::Family::bernoulli:
        return (u > 1.0 - dist.a) ? 1.0 : 0.0;
    case DistributionSpec::Family::multinomial:
        return static_cast<double>(multinomial_index(dist.probs, u));
    case DistributionSpec::Family::weighted_set:
        return dist.values[multinomial_index(dist.probs, u)];
    case DistributionSpec::Family::gamma:
        throw ParameterError("gamma quantile is not provided; draw with sample_scalar");
    }
    throw ParameterError("unknown distribution family");
}

double sample_scalar(const DistributionSpec& dist, rng::RandomStream& stream) {
    dist.validate();
    if (dist.family == DistributionSpec::Family::gamma) {
        return sample_gamma(dist.a, dist.b, stream);
    }
    if (dist.family == DistributionSpec::Family::bernoulli) {
        // direct threshold draw; equivalent to the quantile form
        return (stream.uniform() < dist.a) ? 1.0 : 0.0;
    }
    return quantile(dist, stream.uniform());
}

} // namespace engine::stochastics
