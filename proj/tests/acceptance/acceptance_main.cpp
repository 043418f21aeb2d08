// Acceptance suite: runs every conformance criterion end to end and prints
// one pass/fail line per criterion. Exit code 0 iff all criteria pass.
//
// Replicate batches use fixed seed bases (network 101+, non-network 501+) so
// the whole suite is reproducible bit for bit.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "engine/config.hpp"
#include "engine/dataset.hpp"
#include "engine/evaluate.hpp"
#include "engine/featurize.hpp"
#include "engine/labeling.hpp"
#include "engine/network.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using engine::config::EngineConfig;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
    g_results.push_back({id, name, pass, detail});
    std::printf("criterion %d (%s): %s  [%s]\n", id, name.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: exact homophily values on the conformance network
// ---------------------------------------------------------------------------

engine::network::BipartiteGraph homophily_conformance_graph() {
    using engine::network::Edge;
    using engine::network::Party;
    using engine::network::PartyKind;
    std::vector<Party> parties;
    std::vector<Edge> edges;
    auto add_party = [&](const std::vector<int>& claims) {
        const int p = static_cast<int>(parties.size());
        parties.push_back({PartyKind::person, p + 1});
        for (const int c : claims) edges.push_back({c, p, 1.0});
    };
    add_party({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    add_party({10, 11, 12, 13, 14, 15, 16, 17});
    add_party({18, 19});
    add_party({20, 21});
    add_party({25, 26});
    add_party({26, 27});
    add_party({27, 28});
    add_party({28, 29});
    add_party({29, 25});
    add_party({25, 22});
    add_party({26, 22});
    add_party({27, 23});
    add_party({28, 23});
    add_party({29, 24});
    add_party({25, 23});
    add_party({26, 24});
    return engine::network::BipartiteGraph(30, std::move(parties), edges);
}

void criterion1() {
    const auto graph = homophily_conformance_graph();
    std::vector<std::uint8_t> fraud(30, 0);
    for (int c = 25; c < 30; ++c) fraud[static_cast<std::size_t>(c)] = 1;
    const auto result = engine::network::homophily_metrics(graph, fraud);
    const bool pass = result.dyadicity && result.heterophilicity &&
                      std::abs(*result.dyadicity - 2.5) <= 1e-9 &&
                      std::abs(*result.heterophilicity - 0.28) <= 1e-9;
    record(1, "toy-network homophily oracle", pass,
           "D=" + fmt(result.dyadicity.value_or(-1), 10) +
               " H=" + fmt(result.heterophilicity.value_or(-1), 10));
}

// ---------------------------------------------------------------------------
// replicate machinery for criteria 2-6 and 8
// ---------------------------------------------------------------------------

struct ReplicateSummary {
    double imbalance = 0.0;
    double investigated_fraction = 0.0;
    double expert_fraud_fraction = 0.0;
    std::optional<double> dyadicity;
    std::optional<double> heterophilicity;
    std::vector<std::string> recovery_names;
    std::vector<double> recovery_beta;
    // expert-response experiment
    std::optional<double> m1_auc_out, m1_tdl_out, m1_tdl_in, m2_auc_out, m2_tdl_out;
    // ground-truth-response experiment
    std::optional<double> gt_auc_in, gt_auc_out;
};

EngineConfig desk_config(bool network_effects, std::uint64_t seed) {
    EngineConfig cfg = EngineConfig::defaults();
    cfg.portfolio.n_ph = 20000;
    cfg.imbalance.p_t = 0.02;
    cfg.fraud = engine::config::default_fraud_spec(network_effects);
    cfg.master_seed = seed;
    return cfg;
}

ReplicateSummary run_replicate(bool network_effects, std::uint64_t seed, bool with_models) {
    const auto bundle = engine::dataset::generate(desk_config(network_effects, seed));
    ReplicateSummary s;
    s.imbalance = bundle.manifest.achieved_imbalance;
    const double n = static_cast<double>(bundle.manifest.n_claims);
    s.investigated_fraction =
        static_cast<double>(bundle.manifest.n_expert_fraud + bundle.manifest.n_expert_nonfraud) / n;
    s.expert_fraud_fraction = static_cast<double>(bundle.manifest.n_expert_fraud) / n;
    s.dyadicity = bundle.manifest.dyadicity;
    s.heterophilicity = bundle.manifest.heterophilicity;
    if (with_models) {
        const auto columns = engine::dataset::analysis_columns(bundle.claims, bundle.features);
        const auto recovery = engine::dataset::recover_coefficients(columns);
        s.recovery_names = recovery.names;
        s.recovery_beta = recovery.beta;
        const auto reports = engine::dataset::run_experiment(
            columns, {engine::dataset::model1(), engine::dataset::model2()}, false);
        s.m1_auc_out = reports[0].auc_out;
        s.m1_tdl_out = reports[0].tdl_out;
        s.m1_tdl_in = reports[0].tdl_in;
        s.m2_auc_out = reports[1].auc_out;
        s.m2_tdl_out = reports[1].tdl_out;
        const auto gt_reports =
            engine::dataset::run_experiment(columns, {engine::dataset::model2()}, true);
        s.gt_auc_in = gt_reports[0].auc_in;
        s.gt_auc_out = gt_reports[0].auc_out;
    }
    return s;
}

std::vector<ReplicateSummary> run_batch(bool network_effects, std::uint64_t seed_base, int count,
                                        bool with_models) {
    std::vector<ReplicateSummary> out(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    const int threads = std::min(engine::config::engine_threads(), count);
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            out[static_cast<std::size_t>(i)] =
                run_replicate(network_effects, seed_base + static_cast<std::uint64_t>(i), with_models);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// criterion 7: property suites
// ---------------------------------------------------------------------------

bool property_copula_tau(std::string& detail) {
    using engine::stochastics::CopulaSpec;
    struct Case {
        CopulaSpec spec;
        double tau;
    };
    const std::vector<Case> cases = {
        {CopulaSpec::frank(-25.0), oracles::frank_tau(-25.0)},
        {CopulaSpec::frank(5.0), oracles::frank_tau(5.0)},
        {CopulaSpec::amh(0.95), oracles::amh_tau(0.95)},
    };
    for (const auto& c : cases) {
        engine::rng::RandomStream root(4242);
        auto stream = root.child(0, 0);
        const int n = 100000;
        std::vector<double> u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto [a, b] = engine::stochastics::sample_copula_pair(c.spec, stream);
            u[static_cast<std::size_t>(i)] = a;
            v[static_cast<std::size_t>(i)] = b;
        }
        const double tau = oracles::kendall_tau(u, v);
        if (std::abs(tau - c.tau) > 0.02) {
            detail = "copula tau off: empirical " + fmt(tau) + " vs " + fmt(c.tau);
            return false;
        }
    }
    return true;
}

bool property_birank(std::string& detail) {
    engine::rng::RandomStream root(515);
    auto gen = root.child(0, 0);
    const int n_claims = 60;
    std::vector<int> ph(static_cast<std::size_t>(n_claims));
    std::vector<double> amounts(static_cast<std::size_t>(n_claims), 500.0);
    std::vector<int> persons(static_cast<std::size_t>(n_claims));
    for (int i = 0; i < n_claims; ++i) {
        ph[static_cast<std::size_t>(i)] = 1 + static_cast<int>(gen.uniform_index(25));
        persons[static_cast<std::size_t>(i)] = static_cast<int>(gen.uniform_index(4));
    }
    engine::network::PartyPoolsConfig pools;
    pools.n_garages = 6;
    pools.n_brokers = 3;
    pools.n_experts = 2;
    pools.n_persons = 150;
    auto stream = root.child(1, 0);
    const auto graph = engine::network::assign_parties(ph, amounts, persons, pools, stream);

    std::vector<double> query(static_cast<std::size_t>(n_claims), 0.0);
    for (int i = 0; i < 6; ++i) query[static_cast<std::size_t>(i)] = 1.0;

    std::vector<double> prev;
    std::vector<double> diffs;
    for (int iters = 1; iters <= 12; ++iters) {
        engine::network::BiRankOptions options;
        options.max_iterations = iters;
        options.tolerance = 0.0;
        const auto result = engine::network::birank(graph, query, options);
        if (!prev.empty()) {
            double d = 0.0;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                d = std::max(d, std::abs(result.claim_scores[i] - prev[i]));
            }
            diffs.push_back(d);
        }
        prev = result.claim_scores;
    }
    for (std::size_t i = 1; i < diffs.size(); ++i) {
        if (diffs[i] > diffs[i - 1] + 1e-15) {
            detail = "birank successive differences are not contracting";
            return false;
        }
    }

    std::vector<engine::network::Party> parties2;
    for (int p = 0; p < graph.n_parties(); ++p) parties2.push_back(graph.party(p));
    std::vector<engine::network::Edge> edges2;
    auto perm = [&](int c) { return (c + 17) % n_claims; };
    for (int c = 0; c < n_claims; ++c) {
        for (const auto p : graph.claim_parties(c)) edges2.push_back({perm(c), p, 1.0});
    }
    const engine::network::BipartiteGraph permuted(n_claims, std::move(parties2), edges2);
    std::vector<double> query2(static_cast<std::size_t>(n_claims), 0.0);
    for (int c = 0; c < n_claims; ++c) {
        query2[static_cast<std::size_t>(perm(c))] = query[static_cast<std::size_t>(c)];
    }
    const auto base = engine::network::birank(graph, query);
    const auto shuffled = engine::network::birank(permuted, query2);
    for (int c = 0; c < n_claims; ++c) {
        const double a = base.claim_scores[static_cast<std::size_t>(c)];
        const double b = shuffled.claim_scores[static_cast<std::size_t>(perm(c))];
        if (std::abs(a - b) > 1e-10) {
            detail = "birank scores are not permutation equivariant";
            return false;
        }
    }
    return true;
}

bool property_irls_gradient(std::string& detail) {
    engine::rng::RandomStream root(717);
    auto stream = root.child(0, 0);
    const std::size_t n = 500;
    engine::evaluate::Matrix x;
    x.rows = n;
    x.cols = 2;
    x.data.resize(n * 2);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.at(i, 0) = stream.uniform(-1.0, 1.0);
        x.at(i, 1) = stream.uniform(-1.0, 1.0);
        y[i] = stream.uniform() < 0.25 ? 1 : 0;
    }
    const std::vector<double> beta = {-0.4, 0.9, -1.3};
    std::vector<double> grad(3, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double eta = beta[0] + beta[1] * x.at(i, 0) + beta[2] * x.at(i, 1);
        const double mu = 1.0 / (1.0 + std::exp(-eta));
        grad[0] += y[i] - mu;
        grad[1] += (y[i] - mu) * x.at(i, 0);
        grad[2] += (y[i] - mu) * x.at(i, 1);
    }
    const double h = 1e-6;
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> hi = beta, lo = beta;
        hi[j] += h;
        lo[j] -= h;
        const double fd =
            (engine::evaluate::log_likelihood(x, y, hi) - engine::evaluate::log_likelihood(x, y, lo)) /
            (2.0 * h);
        if (std::abs(fd - grad[j]) > 1e-5 * (std::abs(grad[j]) + 1.0)) {
            detail = "IRLS score does not match finite differences";
            return false;
        }
    }
    return true;
}

bool property_metric_invariance(std::string& detail) {
    engine::rng::RandomStream root(818);
    auto stream = root.child(0, 0);
    const std::size_t n = 400;
    std::vector<double> scores(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = stream.uniform(-3.0, 3.0);
        y[i] = stream.uniform() < 0.3;
    }
    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) transformed[i] = std::tanh(scores[i]) * 10.0 + 20.0;
    const double a1 = engine::evaluate::auc(scores, y).value();
    const double a2 = engine::evaluate::auc(transformed, y).value();
    const double t1 = engine::evaluate::top_decile_lift(scores, y).value();
    const double t2 = engine::evaluate::top_decile_lift(transformed, y).value();
    if (std::abs(a1 - a2) > 1e-12 || std::abs(t1 - t2) > 1e-12) {
        detail = "AUC/TDL changed under a monotone transform";
        return false;
    }
    return true;
}

bool property_bisection_monotonicity(std::string& detail) {
    const EngineConfig cfg = [] {
        EngineConfig c = EngineConfig::defaults();
        c.portfolio.n_ph = 1500;
        c.master_seed = 13;
        return c;
    }();
    const auto bundle = engine::dataset::generate(cfg);
    const engine::network::ClaimProjection projection(bundle.graph);
    const std::size_t n = bundle.claims.size();
    std::vector<double> age(n), nr(n), amount(n), cage(n), n1(n), n2(n);
    for (std::size_t i = 0; i < n; ++i) {
        age[i] = bundle.claims[i].age_ph;
        nr[i] = bundle.claims[i].nr_contracts;
        amount[i] = bundle.claims[i].amount;
        cage[i] = bundle.claims[i].claim_age_months;
        n1[i] = bundle.graph.claim_degree(static_cast<int>(i));
        n2[i] = static_cast<double>(projection.neighbors(static_cast<int>(i)).size());
    }
    const auto statics = engine::labeling::StaticDesign::build({{"AgePH", age},
                                                                {"NrContractsPH", nr},
                                                                {"ClaimAmount", amount},
                                                                {"ClaimAge", cage},
                                                                {"n1.size", n1},
                                                                {"n2.size", n2}});
    engine::rng::RandomStream root(999);
    double prev = -1.0;
    for (const double b0 : {-8.0, -6.0, -4.5, -3.0, -1.5}) {
        auto spec = engine::config::default_fraud_spec(true);
        spec.intercept = b0;
        auto stream = root.child(0, 0);
        const auto run = engine::labeling::run_label_algorithm(bundle.graph, projection, statics, spec,
                                                               cfg.labeling, stream);
        if (run.fraud_fraction < prev) {
            detail = "achieved fraction decreased while raising the intercept";
            return false;
        }
        prev = run.fraud_fraction;
    }
    return true;
}

bool property_determinism_and_integrity(std::string& detail) {
    EngineConfig cfg = EngineConfig::defaults();
    cfg.portfolio.n_ph = 800;
    cfg.master_seed = 2026;
    const fs::path dir_a = fs::temp_directory_path() / "fraudsim_accept_a";
    const fs::path dir_b = fs::temp_directory_path() / "fraudsim_accept_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    engine::dataset::write_bundle(engine::dataset::generate(cfg), dir_a);
    engine::dataset::write_bundle(engine::dataset::generate(cfg), dir_b);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    for (const char* name :
         {"claims.csv", "portfolio.csv", "edges.csv", "features.csv", "manifest.json"}) {
        if (slurp(dir_a / name) != slurp(dir_b / name)) {
            detail = std::string("re-run produced different ") + name;
            return false;
        }
    }
    const auto loaded = engine::dataset::load_bundle(dir_a);
    if (loaded.claims.size() != loaded.manifest.n_claims) {
        detail = "claim count differs from the manifest";
        return false;
    }
    if (loaded.graph.n_claims() != static_cast<int>(loaded.claims.size())) {
        detail = "edge list references a different claim set";
        return false;
    }
    for (int c = 0; c < loaded.graph.n_claims(); ++c) {
        bool has_ph = false;
        for (const auto p : loaded.graph.claim_parties(c)) {
            const auto& party = loaded.graph.party(p);
            if (party.kind == engine::network::PartyKind::policyholder &&
                party.label == loaded.claims[static_cast<std::size_t>(c)].ph_id) {
                has_ph = true;
            }
        }
        if (!has_ph) {
            detail = "claim " + std::to_string(c + 1) + " lost its policyholder edge";
            return false;
        }
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    return true;
}

void criterion7() {
    std::string detail = "copula tau, birank contraction/equivariance, IRLS gradient, "
                         "metric invariance, bisection monotonicity, determinism, integrity";
    bool pass = true;
    using Property = bool (*)(std::string&);
    const Property properties[] = {property_copula_tau,           property_birank,
                                   property_irls_gradient,        property_metric_invariance,
                                   property_bisection_monotonicity, property_determinism_and_integrity};
    for (const Property prop : properties) {
        std::string d;
        if (!prop(d)) {
            pass = false;
            detail = d;
            break;
        }
    }
    record(7, "property suites", pass, detail);
}

} // namespace

int main() {
    std::printf("acceptance suite: desk scale n_ph=20000, p_t=0.02, seed bases 101/501\n");

    criterion1();

    const int replicates = 10;
    const auto network = run_batch(true, 101, replicates, true);
    const auto nonnetwork = run_batch(false, 501, replicates, false);

    // criterion 2: achieved imbalance
    {
        bool pass = true;
        double lo = 1.0, hi = 0.0;
        for (const auto& r : network) {
            lo = std::min(lo, r.imbalance);
            hi = std::max(hi, r.imbalance);
            pass = pass && r.imbalance >= 0.018 && r.imbalance <= 0.022;
        }
        record(2, "imbalance calibration", pass,
               "achieved range [" + fmt(lo) + ", " + fmt(hi) + "] target 0.02");
    }

    // criterion 3: expert label distribution (replicate means)
    {
        std::vector<double> inv, ef;
        for (const auto& r : network) {
            inv.push_back(r.investigated_fraction);
            ef.push_back(r.expert_fraud_fraction);
        }
        const double inv_mean = mean_of(inv);
        const double ef_mean = mean_of(ef);
        const bool pass = inv_mean >= 0.07 && inv_mean <= 0.10 && ef_mean >= 0.002 && ef_mean <= 0.0035;
        record(3, "expert label distribution", pass,
               "mean investigated " + fmt(inv_mean) + " in [0.07,0.10]; mean expert-fraud " +
                   fmt(ef_mean, 5) + " in [0.002,0.0035]");
    }

    // criterion 4: homophily separation
    {
        bool pass = true;
        std::ostringstream detail;
        double dn_lo = 1e9, dn_hi = -1e9;
        for (const auto& r : network) {
            const double d = r.dyadicity.value_or(0.0);
            const double h = r.heterophilicity.value_or(9.0);
            dn_lo = std::min(dn_lo, d);
            dn_hi = std::max(dn_hi, d);
            pass = pass && d > 1.2 && h < 0.95;
        }
        detail << "network D in [" << fmt(dn_lo, 2) << "," << fmt(dn_hi, 2) << "]";
        double nn_d_lo = 1e9, nn_d_hi = -1e9, nn_h_lo = 1e9, nn_h_hi = -1e9;
        for (const auto& r : nonnetwork) {
            const double d = r.dyadicity.value_or(0.0);
            const double h = r.heterophilicity.value_or(0.0);
            nn_d_lo = std::min(nn_d_lo, d);
            nn_d_hi = std::max(nn_d_hi, d);
            nn_h_lo = std::min(nn_h_lo, h);
            nn_h_hi = std::max(nn_h_hi, h);
            pass = pass && d >= 0.8 && d <= 1.2 && h >= 0.9 && h <= 1.1;
        }
        detail << "; non-network D in [" << fmt(nn_d_lo, 2) << "," << fmt(nn_d_hi, 2) << "] H in ["
               << fmt(nn_h_lo, 2) << "," << fmt(nn_h_hi, 2) << "]";
        record(4, "homophily separation", pass, detail.str());
    }

    // criterion 5: coefficient recovery
    {
        const std::vector<std::pair<std::string, double>> targets = {
            {"AgePH", -2.0},     {"NrContractsPH", -1.5}, {"ClaimAmount", 0.2},
            {"ClaimAge", -0.35}, {"n1.size", 2.0},        {"n2.size", -2.0},
        };
        bool pass = true;
        std::ostringstream detail;
        for (const auto& [name, target] : targets) {
            std::vector<double> estimates;
            for (const auto& r : network) {
                for (std::size_t j = 0; j < r.recovery_names.size(); ++j) {
                    if (r.recovery_names[j] == name) estimates.push_back(r.recovery_beta[j]);
                }
            }
            const double m = mean_of(estimates);
            if (std::abs(m - target) > 0.4) pass = false;
            detail << name << "=" << fmt(m, 2) << " ";
        }
        int ratio_below = 0;
        for (const auto& r : network) {
            for (std::size_t j = 0; j < r.recovery_names.size(); ++j) {
                if (r.recovery_names[j] == "n2.ratioFraud" && r.recovery_beta[j] < 3.0) ++ratio_below;
            }
        }
        if (ratio_below < 8) pass = false;
        detail << "ratio<3 in " << ratio_below << "/10";
        record(5, "coefficient recovery", pass, detail.str());
    }

    // criterion 6: detection model ordering
    {
        int m2_wins = 0;
        std::vector<double> m1_tdl, m1_tdl_in, m2_tdl;
        for (const auto& r : network) {
            if (r.m2_auc_out.value_or(0) > r.m1_auc_out.value_or(0) &&
                r.m2_tdl_out.value_or(0) > r.m1_tdl_out.value_or(0)) {
                ++m2_wins;
            }
            m1_tdl.push_back(r.m1_tdl_out.value_or(0));
            m1_tdl_in.push_back(r.m1_tdl_in.value_or(0));
            m2_tdl.push_back(r.m2_tdl_out.value_or(0));
        }
        const double m1_mean = mean_of(m1_tdl);
        const double m2_mean = mean_of(m2_tdl);
        const bool pass = m2_wins >= 9 && m1_mean >= 0.7 && m1_mean <= 1.5 && m2_mean > 2.0;
        record(6, "detection model ordering", pass,
               "model2 wins " + std::to_string(m2_wins) + "/10; mean out-of-sample TDL model1 " +
                   fmt(m1_mean, 2) + " (in-sample " + fmt(mean_of(m1_tdl_in), 2) + "), model2 " +
                   fmt(m2_mean, 2));
    }

    criterion7();

    // criterion 8: ground-truth response mode
    {
        int wins = 0;
        for (const auto& r : network) {
            if (r.gt_auc_in.value_or(0) >= r.gt_auc_out.value_or(1)) ++wins;
        }
        const bool pass = wins >= 8;
        record(8, "ground-truth response in/out ordering", pass,
               "in-sample AUC >= out-of-sample in " + std::to_string(wins) + "/10");
    }

    int failures = 0;
    for (const auto& c : g_results) failures += !c.pass;
    std::printf("%zu criteria, %d failed\n", g_results.size(), failures);
    return failures == 0 ? 0 : 1;
}
