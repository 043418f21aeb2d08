#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "engine/featurize.hpp"
#include "engine/model_spec.hpp"
#include "engine/network.hpp"
#include "engine/rng.hpp"

namespace engine::labeling {

using featurize::Label;

// Classification of fraud-model feature names. Label-dependent features
// (BiRank score statistics and the second-order label ratios) are recomputed
// and renormalized on each iteration's subset; everything else is static and
// normalized once over all claims.
bool is_network_feature(const std::string& name);
bool is_label_dependent_feature(const std::string& name);

// Normalized static covariate columns, one per feature name.
struct StaticDesign {
    std::unordered_map<std::string, std::vector<double>> columns;
    std::size_t n_rows = 0;

    // Normalizes each raw column onto [-1, 1] (constant columns become 0).
    static StaticDesign build(const std::vector<std::pair<std::string, std::vector<double>>>& raw);

    const std::vector<double>& column(const std::string& name) const;
};

struct LabelingConfig {
    double init_fraction = 0.01;
    double step_fraction = 0.10;
    network::BiRankOptions birank;
};

struct ImbalanceTarget {
    double p_t = 0.01;
    double search_lo = -15.0;
    double search_hi = 5.0;
    double tolerance = 5e-4;
    int max_steps = 40;

    void validate(std::vector<std::string>& problems) const;
};

// Independent Bernoulli labels for the given claims. `feature_of(claim,
// name)` must return the already-normalized covariate; values outside
// [-1, 1] (beyond tolerance) indicate a missed normalization pass and raise
// an error. The uniform for claim c comes from stream.child(label_uniform,
// c), so the draw depends only on the claim identity.
void label_batch(std::span<const int> claims, const model::ModelSpec& spec,
                 const std::function<double(int, const std::string&)>& feature_of,
                 const rng::RandomStream& stream, std::vector<Label>& labels);

struct LabelRunResult {
    std::vector<Label> labels;
    int iterations = 0;
    double fraud_fraction = 0.0;
    std::vector<std::size_t> subset_sizes;
    // per-iteration subsets; each claim appears in exactly one
    std::vector<std::vector<int>> subsets;
};

// Iterative ground-truth labeling: an initial 1% batch drawn without the
// network terms, then 10% batches merged with the unlabeled second-order
// neighborhood of the previous iteration's fraud claims, with per-iteration
// featurization, until every claim is labeled.
LabelRunResult run_label_algorithm(const network::BipartiteGraph& graph,
                                   const network::ClaimProjection& projection,
                                   const StaticDesign& statics, const model::ModelSpec& fraud_spec,
                                   const LabelingConfig& config, const rng::RandomStream& stream);

struct CalibrationResult {
    double intercept = 0.0;
    double achieved_imbalance = 0.0;
    LabelRunResult run;
    int evaluations = 0;
};

// Finds the fraud-model intercept whose full labeling run best matches the
// target imbalance. The labeling stream is fixed across probes and the
// per-claim uniforms are common random numbers, which makes the achieved
// fraction monotone in the intercept and bisection valid.
CalibrationResult calibrate_intercept(const network::BipartiteGraph& graph,
                                      const network::ClaimProjection& projection,
                                      const StaticDesign& statics, const model::ModelSpec& fraud_spec,
                                      const LabelingConfig& config, const ImbalanceTarget& target,
                                      const rng::RandomStream& stream);

} // namespace engine::labeling
