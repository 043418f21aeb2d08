#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "engine/distributions.hpp"
#include "engine/errors.hpp"
#include "engine/rng.hpp"
#include "oracles.hpp"

using engine::rng::RandomStream;
using engine::rng::Scope;
using engine::stochastics::DistributionSpec;

TEST_CASE("streams with identical path reproduce identical draws") {
    RandomStream a(42);
    RandomStream b(42);
    auto a1 = a.child(Scope::portfolio_age, 7).child(3, 1);
    auto b1 = b.child(Scope::portfolio_age, 7).child(3, 1);
    for (int i = 0; i < 100; ++i) {
        CHECK(a1.next_u64() == b1.next_u64());
    }
}

TEST_CASE("sibling substreams are order independent") {
    RandomStream root(99);
    std::vector<double> forward(50), backward(50);
    for (int i = 0; i < 50; ++i) {
        auto s = root.child(Scope::claim_amount, static_cast<std::uint64_t>(i));
        forward[static_cast<std::size_t>(i)] = s.uniform();
    }
    for (int i = 49; i >= 0; --i) {
        auto s = root.child(Scope::claim_amount, static_cast<std::uint64_t>(i));
        backward[static_cast<std::size_t>(i)] = s.uniform();
    }
    CHECK(forward == backward);
}

TEST_CASE("different seeds decorrelate") {
    RandomStream a(1);
    RandomStream b(2);
    const int n = 4096;
    int agree = 0;
    auto sa = a.child(1, 0);
    auto sb = b.child(1, 0);
    for (int i = 0; i < n; ++i) {
        agree += (sa.uniform() < 0.5) == (sb.uniform() < 0.5);
    }
    CHECK(std::abs(agree - n / 2) < 4 * std::sqrt(n / 4.0));
}

TEST_CASE("uniform draws live in the open unit interval with mean one half") {
    RandomStream s(7);
    auto stream = s.child(0, 0);
    const int n = 100000;
    std::vector<double> draws(static_cast<std::size_t>(n));
    for (auto& d : draws) {
        d = stream.uniform();
        REQUIRE(d > 0.0);
        REQUIRE(d < 1.0);
    }
    // CLT bound: 3 sigma / sqrt(n), sigma^2 = 1/12
    CHECK(std::abs(oracles::mean(draws) - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal quantile matches reference values") {
    using engine::stochastics::normal_quantile;
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-12));
}

TEST_CASE("degenerate bernoulli draws zero always") {
    RandomStream s(1);
    auto stream = s.child(0, 0);
    const auto spec = DistributionSpec::bernoulli(0.0);
    for (int i = 0; i < 1000; ++i) {
        CHECK(engine::stochastics::sample_scalar(spec, stream) == 0.0);
    }
}

TEST_CASE("uniform(0,1) sample mean within CLT band") {
    RandomStream s(2024);
    auto stream = s.child(0, 0);
    const auto spec = DistributionSpec::uniform(0.0, 1.0);
    const int n = 100000;
    std::vector<double> draws(static_cast<std::size_t>(n));
    for (auto& d : draws) d = engine::stochastics::sample_scalar(spec, stream);
    CHECK(std::abs(oracles::mean(draws) - 0.5) < 0.01);
}

TEST_CASE("distribution moments match within monte carlo error") {
    RandomStream s(5);
    const int n = 100000;
    SUBCASE("poisson") {
        auto stream = s.child(1, 0);
        const double lambda = 0.838475; // contract-rate curve at age 40
        const auto spec = DistributionSpec::poisson(lambda);
        std::vector<double> draws(static_cast<std::size_t>(n));
        for (auto& d : draws) d = engine::stochastics::sample_scalar(spec, stream);
        CHECK(std::abs(oracles::mean(draws) - lambda) < 3.0 * std::sqrt(lambda / n));
    }
    SUBCASE("gamma") {
        auto stream = s.child(2, 0);
        const double shape = 0.25, rate = 0.25 / 430.0;
        std::vector<double> draws(static_cast<std::size_t>(n));
        for (auto& d : draws) d = engine::stochastics::sample_gamma(shape, rate, stream);
        const double mean = shape / rate;
        const double sd = std::sqrt(shape) / rate;
        CHECK(std::abs(oracles::mean(draws) - mean) < 3.0 * sd / std::sqrt(n));
        CHECK(std::abs(oracles::variance(draws) - sd * sd) < 0.1 * sd * sd);
    }
    SUBCASE("exponential") {
        auto stream = s.child(3, 0);
        const auto spec = DistributionSpec::exponential(0.25);
        std::vector<double> draws(static_cast<std::size_t>(n));
        for (auto& d : draws) d = engine::stochastics::sample_scalar(spec, stream);
        CHECK(std::abs(oracles::mean(draws) - 4.0) < 3.0 * 4.0 / std::sqrt(n));
    }
}

TEST_CASE("multinomial inverse-CDF breaks ties toward the lower index") {
    const std::vector<double> probs = {0.25, 0.25, 0.5};
    CHECK(engine::stochastics::multinomial_index(probs, 0.25) == 0);
    CHECK(engine::stochastics::multinomial_index(probs, 0.2500001) == 1);
    CHECK(engine::stochastics::multinomial_index(probs, 0.5) == 1);
    CHECK(engine::stochastics::multinomial_index(probs, 0.99) == 2);
}

TEST_CASE("invalid distribution parameters raise parameter errors") {
    RandomStream s(1);
    auto stream = s.child(0, 0);
    CHECK_THROWS_AS(engine::stochastics::sample_scalar(DistributionSpec::normal(0.0, -1.0), stream),
                    engine::ParameterError);
    CHECK_THROWS_AS(engine::stochastics::sample_scalar(DistributionSpec::exponential(0.0), stream),
                    engine::ParameterError);
    CHECK_THROWS_AS(engine::stochastics::sample_scalar(DistributionSpec::bernoulli(1.5), stream),
                    engine::ParameterError);
    CHECK_THROWS_AS(engine::stochastics::sample_scalar(DistributionSpec::multinomial({0.5, 0.2}), stream),
                    engine::ParameterError);
}

TEST_CASE("sampling equals the quantile transform of the same uniforms") {
    RandomStream a(77);
    RandomStream b(77);
    auto sa = a.child(0, 0);
    auto sb = b.child(0, 0);
    const auto spec = DistributionSpec::poisson(2.5);
    for (int i = 0; i < 200; ++i) {
        const double draw = engine::stochastics::sample_scalar(spec, sa);
        const double via_quantile = engine::stochastics::quantile(spec, sb.uniform());
        CHECK(draw == via_quantile);
    }
}
