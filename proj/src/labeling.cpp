#include "engine/labeling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "engine/errors.hpp"

namespace engine::labeling {

namespace {

constexpr std::array<const char*, 12> kNetworkNames = {
    "scores0", "n1.q1", "n1.med", "n1.midmean", "n2.q1", "n2.med", "n2.midmean",
    "n1.size", "n2.size", "n2.ratioFraud", "n2.ratioNonFraud", "n2.binFraud"};

constexpr std::array<const char*, 10> kLabelDependentNames = {
    "scores0", "n1.q1", "n1.med", "n1.midmean", "n2.q1", "n2.med", "n2.midmean",
    "n2.ratioFraud", "n2.ratioNonFraud", "n2.binFraud"};

constexpr std::array<const char*, 7> kScoreNames = {"scores0", "n1.q1", "n1.med", "n1.midmean",
                                                    "n2.q1", "n2.med", "n2.midmean"};


double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

std::vector<int> sample_without_replacement(std::vector<int> pool, std::size_t k,
                                            rng::RandomStream stream) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(stream.uniform_index(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

double feature_value(const featurize::FeatureRow& row, const std::string& name) {
    if (name == "scores0") return row.scores0;
    if (name == "n1.q1") return row.n1_q1;
    if (name == "n1.med") return row.n1_med;
    if (name == "n1.midmean") return row.n1_midmean;
    if (name == "n2.q1") return row.n2_q1;
    if (name == "n2.med") return row.n2_med;
    if (name == "n2.midmean") return row.n2_midmean;
    if (name == "n2.ratioFraud") return row.n2_ratio_fraud;
    if (name == "n2.ratioNonFraud") return row.n2_ratio_nonfraud;
    if (name == "n2.binFraud") return row.n2_bin_fraud ? 1.0 : 0.0;
    throw SchemaError("unknown network feature '" + name + "'");
}

} // namespace

bool is_network_feature(const std::string& name) {
    return std::find(kNetworkNames.begin(), kNetworkNames.end(), name) != kNetworkNames.end();
}

bool is_label_dependent_feature(const std::string& name) {
    return std::find(kLabelDependentNames.begin(), kLabelDependentNames.end(), name) !=
           kLabelDependentNames.end();
}

StaticDesign StaticDesign::build(const std::vector<std::pair<std::string, std::vector<double>>>& raw) {
    StaticDesign d;
    for (const auto& [name, column] : raw) {
        if (d.n_rows == 0) d.n_rows = column.size();
        if (column.size() != d.n_rows) throw ParameterError("static design columns differ in length");
        d.columns.emplace(name, featurize::normalize_signed_unit_or_zero(column));
    }
    return d;
}

const std::vector<double>& StaticDesign::column(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) throw SchemaError("static design is missing feature '" + name + "'");
    return it->second;
}

void ImbalanceTarget::validate(std::vector<std::string>& problems) const {
    if (!(p_t > 0.0 && p_t < 0.5)) problems.emplace_back("imbalance: target must lie in (0, 0.5)");
    if (!(search_lo < search_hi)) problems.emplace_back("imbalance: search interval inverted");
    if (!(tolerance > 0.0)) problems.emplace_back("imbalance: tolerance must be positive");
    if (max_steps < 1) problems.emplace_back("imbalance: max_steps must be at least 1");
}

void label_batch(std::span<const int> claims, const model::ModelSpec& spec,
                 const std::function<double(int, const std::string&)>& feature_of,
                 const rng::RandomStream& stream, std::vector<Label>& labels) {
    for (const int c : claims) {
        double eta = spec.intercept;
        for (const auto& term : spec.terms) {
            if (term.level) throw SchemaError("fraud model terms must be numeric");
            const double x = feature_of(c, term.feature);
            if (std::abs(x) > 1.0 + 1e-9) {
                throw Error("fraud-model feature '" + term.feature +
                            "' is not normalized; featurization pass missing");
            }
            eta += term.coefficient * x;
        }
        const double pi = logistic(eta);
        auto sub = stream.child(rng::Scope::label_uniform, static_cast<std::uint64_t>(c));
        labels[static_cast<std::size_t>(c)] = (sub.uniform() < pi) ? Label::fraud : Label::nonfraud;
    }
}

LabelRunResult run_label_algorithm(const network::BipartiteGraph& graph,
                                   const network::ClaimProjection& projection,
                                   const StaticDesign& statics, const model::ModelSpec& fraud_spec,
                                   const LabelingConfig& config, const rng::RandomStream& stream) {
    const int n = graph.n_claims();
    if (n == 0) return {};
    if (statics.n_rows != static_cast<std::size_t>(n)) {
        throw ParameterError("static design row count must equal claim count");
    }

    // Partition the model's features once.
    std::vector<std::string> dependent_names;
    bool needs_scores = false;
    for (const auto& term : fraud_spec.terms) {
        if (is_label_dependent_feature(term.feature)) {
            if (std::find(dependent_names.begin(), dependent_names.end(), term.feature) ==
                dependent_names.end()) {
                dependent_names.push_back(term.feature);
            }
            if (std::find(kScoreNames.begin(), kScoreNames.end(), term.feature) != kScoreNames.end()) {
                needs_scores = true;
            }
        } else {
            statics.column(term.feature); // fail fast on missing covariates
        }
    }

    std::vector<std::string> network_names;
    for (const auto& term : fraud_spec.terms) {
        if (is_network_feature(term.feature)) network_names.push_back(term.feature);
    }
    const model::ModelSpec init_spec = fraud_spec.without_features(network_names);

    LabelRunResult result;
    result.labels.assign(static_cast<std::size_t>(n), Label::unlabeled);

    auto static_lookup = [&](int c, const std::string& name) {
        return statics.column(name)[static_cast<std::size_t>(c)];
    };

    // Iteration 0: a small batch labeled without any network information.
    std::vector<int> new_frauds;
    {
        std::vector<int> all(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
        const std::size_t k0 =
            std::max<std::size_t>(1, static_cast<std::size_t>(config.init_fraction * n));
        const std::vector<int> subset =
            sample_without_replacement(all, k0, stream.child(rng::Scope::label_subset, 0));
        label_batch(subset, init_spec, static_lookup, stream, result.labels);
        result.subset_sizes.push_back(subset.size());
        for (const int c : subset) {
            if (result.labels[static_cast<std::size_t>(c)] == Label::fraud) new_frauds.push_back(c);
        }
        result.subsets.push_back(subset);
    }

    const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(config.step_fraction * n));
    int iteration = 0;
    for (;;) {
        std::vector<int> unlabeled;
        for (int c = 0; c < n; ++c) {
            if (result.labels[static_cast<std::size_t>(c)] == Label::unlabeled) unlabeled.push_back(c);
        }
        if (unlabeled.empty()) break;
        ++iteration;

        // Random batch merged with the unlabeled 2nd-order neighborhood of
        // the previous iteration's fraud claims.
        std::vector<int> subset = sample_without_replacement(
            unlabeled, step, stream.child(rng::Scope::label_subset, static_cast<std::uint64_t>(iteration)));
        for (const int f : new_frauds) {
            for (const std::int32_t c : projection.neighbors(f)) {
                if (result.labels[static_cast<std::size_t>(c)] == Label::unlabeled) subset.push_back(c);
            }
        }
        std::sort(subset.begin(), subset.end());
        subset.erase(std::unique(subset.begin(), subset.end()), subset.end());

        network::BiRankResult scores;
        if (needs_scores) {
            std::vector<double> query(static_cast<std::size_t>(n), 0.0);
            for (int c = 0; c < n; ++c) {
                if (result.labels[static_cast<std::size_t>(c)] == Label::fraud) {
                    query[static_cast<std::size_t>(c)] = 1.0;
                }
            }
            scores = network::birank(graph, query, config.birank);
        }

        // Label-dependent features for the subset, renormalized on the
        // subset so their scale stays comparable while the network of known
        // labels grows.
        std::unordered_map<std::string, std::vector<double>> dependent_cols;
        if (!dependent_names.empty()) {
            std::vector<featurize::FeatureRow> rows(subset.size());
            for (std::size_t i = 0; i < subset.size(); ++i) {
                rows[i] = featurize::features_for_claim(graph, projection, needs_scores ? &scores : nullptr,
                                                        result.labels, subset[i]);
            }
            for (const auto& name : dependent_names) {
                std::vector<double> raw(subset.size());
                for (std::size_t i = 0; i < subset.size(); ++i) raw[i] = feature_value(rows[i], name);
                dependent_cols.emplace(name, featurize::normalize_signed_unit_or_zero(raw));
            }
        }
        std::unordered_map<int, std::size_t> subset_pos;
        for (std::size_t i = 0; i < subset.size(); ++i) subset_pos.emplace(subset[i], i);

        auto lookup = [&](int c, const std::string& name) {
            if (is_label_dependent_feature(name)) {
                return dependent_cols.at(name)[subset_pos.at(c)];
            }
            return statics.column(name)[static_cast<std::size_t>(c)];
        };
        label_batch(subset, fraud_spec, lookup, stream, result.labels);
        result.subset_sizes.push_back(subset.size());

        new_frauds.clear();
        for (const int c : subset) {
            if (result.labels[static_cast<std::size_t>(c)] == Label::fraud) new_frauds.push_back(c);
        }
        result.subsets.push_back(std::move(subset));
    }

    result.iterations = iteration;
    std::size_t frauds = 0;
    for (const Label l : result.labels) frauds += (l == Label::fraud);
    result.fraud_fraction = static_cast<double>(frauds) / static_cast<double>(n);
    return result;
}

CalibrationResult calibrate_intercept(const network::BipartiteGraph& graph,
                                      const network::ClaimProjection& projection,
                                      const StaticDesign& statics, const model::ModelSpec& fraud_spec,
                                      const LabelingConfig& config, const ImbalanceTarget& target,
                                      const rng::RandomStream& stream) {
    {
        std::vector<std::string> problems;
        target.validate(problems);
        if (!problems.empty()) throw ConfigError(problems.front());
    }

    CalibrationResult best;
    best.achieved_imbalance = std::numeric_limits<double>::quiet_NaN();
    int evaluations = 0;
    double best_gap = std::numeric_limits<double>::infinity();

    // Every probe re-runs the full labeling algorithm with the same stream;
    // common random numbers keep the achieved fraction monotone in the
    // intercept.
    auto probe = [&](double intercept) {
        model::ModelSpec spec = fraud_spec;
        spec.intercept = intercept;
        LabelRunResult run = run_label_algorithm(graph, projection, statics, spec, config, stream);
        ++evaluations;
        const double p = run.fraud_fraction;
        const double gap = std::abs(p - target.p_t);
        if (gap < best_gap) {
            best_gap = gap;
            best.intercept = intercept;
            best.achieved_imbalance = p;
            best.run = std::move(run);
        }
        return p;
    };

    double lo = target.search_lo;
    double hi = target.search_hi;
    const double p_lo = probe(lo);
    const double p_hi = probe(hi);
    if (p_lo > target.p_t || p_hi < target.p_t) {
        throw CalibrationError("imbalance target is not bracketed by the intercept search interval",
                               best.intercept, best.achieved_imbalance);
    }

    for (int s = 0; s < target.max_steps && best_gap > target.tolerance; ++s) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid) < target.p_t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.evaluations = evaluations;
    return best;
}

} // namespace engine::labeling
