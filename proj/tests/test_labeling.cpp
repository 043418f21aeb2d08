#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "engine/config.hpp"
#include "engine/errors.hpp"
#include "engine/labeling.hpp"
#include "oracles.hpp"

using engine::featurize::Label;
using engine::labeling::CalibrationResult;
using engine::labeling::ImbalanceTarget;
using engine::labeling::LabelingConfig;
using engine::labeling::LabelRunResult;
using engine::labeling::StaticDesign;
using engine::model::ModelSpec;
using engine::network::BipartiteGraph;
using engine::network::ClaimProjection;
using engine::rng::RandomStream;

namespace {

struct Setup {
    BipartiteGraph graph;
    ClaimProjection projection;
    StaticDesign statics;
};

Setup make_setup(int n_claims, std::uint64_t seed) {
    RandomStream root(seed);
    auto gen = root.child(0, 0);
    std::vector<int> ph_ids(static_cast<std::size_t>(n_claims));
    std::vector<double> amounts(static_cast<std::size_t>(n_claims));
    std::vector<int> persons(static_cast<std::size_t>(n_claims));
    std::vector<double> age(static_cast<std::size_t>(n_claims));
    std::vector<double> ncontracts(static_cast<std::size_t>(n_claims));
    std::vector<double> claim_age(static_cast<std::size_t>(n_claims));
    for (int i = 0; i < n_claims; ++i) {
        const auto k = static_cast<std::size_t>(i);
        ph_ids[k] = 1 + static_cast<int>(gen.uniform_index(static_cast<std::uint64_t>(n_claims / 2 + 1)));
        amounts[k] = gen.uniform(50.0, 4000.0);
        persons[k] = static_cast<int>(gen.uniform_index(6));
        age[k] = gen.uniform(18.0, 80.0);
        ncontracts[k] = 1.0 + static_cast<double>(gen.uniform_index(5));
        claim_age[k] = static_cast<double>(gen.uniform_index(60));
    }
    engine::network::PartyPoolsConfig pools;
    pools.n_garages = std::max(2, n_claims * 3 / 100);
    pools.n_brokers = std::max(2, n_claims / 100);
    pools.n_experts = std::max(2, n_claims / 100);
    pools.n_persons = n_claims * 2;
    auto net_stream = root.child(1, 0);
    BipartiteGraph graph = engine::network::assign_parties(ph_ids, amounts, persons, pools, net_stream);
    ClaimProjection projection(graph);

    std::vector<double> n1(static_cast<std::size_t>(n_claims)), n2(static_cast<std::size_t>(n_claims));
    for (int c = 0; c < n_claims; ++c) {
        n1[static_cast<std::size_t>(c)] = graph.claim_degree(c);
        n2[static_cast<std::size_t>(c)] = static_cast<double>(projection.neighbors(c).size());
    }
    StaticDesign statics = StaticDesign::build({
        {"AgePH", age},
        {"NrContractsPH", ncontracts},
        {"ClaimAmount", amounts},
        {"ClaimAge", claim_age},
        {"n1.size", n1},
        {"n2.size", n2},
    });
    return Setup{std::move(graph), std::move(projection), std::move(statics)};
}

ModelSpec fraud_spec(double intercept, bool network_effects) {
    ModelSpec spec = engine::config::default_fraud_spec(network_effects);
    spec.intercept = intercept;
    return spec;
}

} // namespace

TEST_CASE("label_batch draws bernoulli labels from the logistic model") {
    const int n = 100000;
    std::vector<Label> labels(static_cast<std::size_t>(n), Label::unlabeled);
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    RandomStream root(5);
    auto stream = root.child(0, 0);

    SUBCASE("zero covariates and zero intercept give probability one half") {
        ModelSpec spec;
        spec.intercept = 0.0;
        engine::labeling::label_batch(ids, spec, [](int, const std::string&) { return 0.0; }, stream,
                                      labels);
        const double frac =
            static_cast<double>(std::count(labels.begin(), labels.end(), Label::fraud)) / n;
        CHECK(std::abs(frac - 0.5) < 3.0 * std::sqrt(0.25 / n));
    }

    SUBCASE("a deeply negative intercept saturates to nonfraud") {
        ModelSpec spec;
        spec.intercept = -30.0;
        engine::labeling::label_batch(ids, spec, [](int, const std::string&) { return 0.0; }, stream,
                                      labels);
        CHECK(std::count(labels.begin(), labels.end(), Label::fraud) == 0);
    }

    SUBCASE("fixed probability 0.02 lands in the binomial band") {
        ModelSpec spec;
        spec.intercept = std::log(0.02 / 0.98);
        engine::labeling::label_batch(ids, spec, [](int, const std::string&) { return 0.0; }, stream,
                                      labels);
        const double frac =
            static_cast<double>(std::count(labels.begin(), labels.end(), Label::fraud)) / n;
        CHECK(std::abs(frac - 0.02) < 3.0 * std::sqrt(0.02 * 0.98 / n));
    }

    SUBCASE("unnormalized features are a pipeline-order error") {
        ModelSpec spec;
        spec.intercept = 0.0;
        spec.terms = {{"ClaimAmount", std::nullopt, 0.2}};
        CHECK_THROWS_AS(engine::labeling::label_batch(
                            ids, spec, [](int, const std::string&) { return 412.0; }, stream, labels),
                        engine::Error);
    }
}

TEST_CASE("the labeling algorithm labels every claim exactly once") {
    const Setup setup = make_setup(1500, 11);
    LabelingConfig config;
    RandomStream root(12);
    auto stream = root.child(0, 0);
    const LabelRunResult result = engine::labeling::run_label_algorithm(
        setup.graph, setup.projection, setup.statics, fraud_spec(-4.0, true), config, stream);

    CHECK(std::count(result.labels.begin(), result.labels.end(), Label::unlabeled) == 0);
    std::size_t subset_total = 0;
    for (const auto s : result.subset_sizes) subset_total += s;
    CHECK(subset_total == result.labels.size());

    // initial batch is one percent of all claims
    CHECK(result.subset_sizes.front() == 15);
    CHECK(result.iterations >= 1);

    SUBCASE("the run is deterministic in the stream") {
        auto stream2 = root.child(0, 0);
        const LabelRunResult again = engine::labeling::run_label_algorithm(
            setup.graph, setup.projection, setup.statics, fraud_spec(-4.0, true), config, stream2);
        CHECK(again.labels == result.labels);
        CHECK(again.iterations == result.iterations);
    }
}

TEST_CASE("frontier claims join the following iteration's subset") {
    const Setup setup = make_setup(900, 13);
    LabelingConfig config;
    RandomStream root(14);
    auto stream = root.child(0, 0);
    const LabelRunResult result = engine::labeling::run_label_algorithm(
        setup.graph, setup.projection, setup.statics, fraud_spec(-2.5, true), config, stream);
    REQUIRE(result.subsets.size() == result.subset_sizes.size());

    // replay the iterations: every unlabeled second-order neighbor of an
    // iteration's fraud claims must be in the next subset
    std::vector<bool> labeled(result.labels.size(), false);
    for (std::size_t t = 0; t < result.subsets.size(); ++t) {
        if (t > 0) {
            const auto& prev = result.subsets[t - 1];
            const auto& cur = result.subsets[t];
            const std::set<int> cur_set(cur.begin(), cur.end());
            for (const int f : prev) {
                if (result.labels[static_cast<std::size_t>(f)] != Label::fraud) continue;
                for (const int neighbor : setup.projection.neighbors(f)) {
                    if (!labeled[static_cast<std::size_t>(neighbor)]) {
                        CHECK(cur_set.count(neighbor) == 1);
                    }
                }
            }
        }
        for (const int c : result.subsets[t]) {
            CHECK(!labeled[static_cast<std::size_t>(c)]); // never relabeled
            labeled[static_cast<std::size_t>(c)] = true;
        }
    }
    CHECK(std::count(labeled.begin(), labeled.end(), false) == 0);
}

TEST_CASE("achieved fraction is monotone in the intercept under common random numbers") {
    const Setup setup = make_setup(1200, 15);
    LabelingConfig config;
    RandomStream root(16);
    double previous = -1.0;
    for (const double b0 : {-9.0, -7.0, -5.0, -4.0, -3.0, -2.0, -1.0}) {
        auto stream = root.child(0, 0); // identical stream for every probe
        const LabelRunResult result = engine::labeling::run_label_algorithm(
            setup.graph, setup.projection, setup.statics, fraud_spec(b0, true), config, stream);
        CHECK(result.fraud_fraction >= previous);
        previous = result.fraud_fraction;
    }
}

TEST_CASE("calibration hits the target for an intercept-only model") {
    const Setup setup = make_setup(4000, 17);
    ModelSpec spec; // all coefficients zero
    LabelingConfig config;
    ImbalanceTarget target;
    target.p_t = 0.05;
    target.tolerance = 0.002;
    RandomStream root(18);
    auto stream = root.child(0, 0);
    const CalibrationResult result = engine::labeling::calibrate_intercept(
        setup.graph, setup.projection, setup.statics, spec, config, target, stream);
    CHECK(std::abs(result.achieved_imbalance - 0.05) <= 0.002);
    // the calibrated intercept sits near logit(p_t)
    CHECK(std::abs(result.intercept - std::log(0.05 / 0.95)) < 0.35);

    SUBCASE("the calibration objective is deterministic") {
        auto stream2 = root.child(0, 0);
        const CalibrationResult again = engine::labeling::calibrate_intercept(
            setup.graph, setup.projection, setup.statics, spec, config, target, stream2);
        CHECK(again.intercept == result.intercept);
        CHECK(again.achieved_imbalance == result.achieved_imbalance);
        CHECK(again.run.labels == result.run.labels);
    }
}

TEST_CASE("an unbracketable target raises a calibration error") {
    const Setup setup = make_setup(400, 19);
    ModelSpec spec;
    LabelingConfig config;
    ImbalanceTarget target;
    target.p_t = 0.4;
    target.search_lo = -15.0;
    target.search_hi = -10.0; // fraction stays near zero on this interval
    RandomStream root(20);
    auto stream = root.child(0, 0);
    CHECK_THROWS_AS(engine::labeling::calibrate_intercept(setup.graph, setup.projection, setup.statics,
                                                          spec, config, target, stream),
                    engine::CalibrationError);
}

TEST_CASE("network effects concentrate fraud in the graph") {
    const Setup setup = make_setup(2500, 21);
    LabelingConfig config;
    ImbalanceTarget target;
    target.p_t = 0.05;
    target.tolerance = 0.003;
    RandomStream root(22);

    auto run_type = [&](bool network_effects) {
        auto stream = root.child(0, 0);
        const CalibrationResult result = engine::labeling::calibrate_intercept(
            setup.graph, setup.projection, setup.statics,
            engine::config::default_fraud_spec(network_effects), config, target, stream);
        std::vector<std::uint8_t> fraud(result.run.labels.size(), 0);
        for (std::size_t i = 0; i < result.run.labels.size(); ++i) {
            fraud[i] = result.run.labels[i] == Label::fraud ? 1 : 0;
        }
        return engine::network::homophily_metrics(setup.projection, fraud);
    };

    const auto with_network = run_type(true);
    const auto without_network = run_type(false);
    REQUIRE(with_network.dyadicity.has_value());
    REQUIRE(without_network.dyadicity.has_value());
    CHECK(*with_network.dyadicity > 1.0);
    CHECK(*with_network.heterophilicity < 1.0);
    CHECK(std::abs(*without_network.dyadicity - 1.0) < 0.45);
    CHECK(std::abs(*without_network.heterophilicity - 1.0) < 0.2);
}
