#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "engine/claims.hpp"
#include "engine/config.hpp"
#include "engine/evaluate.hpp"
#include "engine/featurize.hpp"
#include "engine/investigate.hpp"
#include "engine/network.hpp"
#include "engine/portfolio.hpp"

namespace engine::dataset {

// One claim with everything the tabular outputs carry.
struct ClaimRow {
    int claim_id = 0; // 1-based, stable across runs
    int ph_id = 0;
    int contract_index = 0;
    int k = 0;
    double age_ph = 0.0;
    std::string gender;
    double exp_ph = 0.0;
    double rate_ncontracts = 0.0;
    int nr_contracts = 0;
    double exp_contract = 0.0;
    double age_car = 0.0;
    double orig_value_car = 0.0;
    double value_car = 0.0;
    std::string coverage;
    std::string fuel;
    int bonus_malus = 0;
    double amount = 0.0;
    int claim_age_months = 0;
    double claim_date_years = 0.0;
    bool police = false;
    int n_persons = 0;
    int garage = -1;
    int broker = -1;
    int expert_party = -1;
    bool fraud = false;
    investigate::ExpertLabel expert = investigate::ExpertLabel::uninvestigated;
};

struct Manifest {
    std::string engine_version = config::kEngineVersion;
    std::uint64_t master_seed = 0;
    std::string config_hash;
    std::size_t n_policyholders = 0;
    std::size_t n_contracts = 0;
    std::size_t n_claims = 0;
    double achieved_imbalance = 0.0;
    double calibrated_intercept = 0.0;
    int labeling_iterations = 0;
    int calibration_evaluations = 0;
    std::optional<double> dyadicity;
    std::optional<double> heterophilicity;
    std::size_t n_fraud = 0;
    std::size_t n_nonfraud = 0;
    std::size_t n_expert_fraud = 0;
    std::size_t n_expert_nonfraud = 0;
    std::size_t n_uninvestigated = 0;
};

struct DatasetBundle {
    config::EngineConfig config;
    portfolio::Portfolio portfolio;
    std::vector<ClaimRow> claims;
    network::BipartiteGraph graph;
    std::vector<featurize::FeatureRow> features; // final featurization pass
    Manifest manifest;
};

// Runs the full seven-step pipeline for one configuration. Deterministic in
// (config, master_seed); errors carry the pipeline step they occurred in.
DatasetBundle generate(const config::EngineConfig& cfg);

// claims.csv, portfolio.csv, edges.csv, features.csv and manifest.json.
void write_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

struct LoadedDataset {
    std::vector<ClaimRow> claims;
    network::BipartiteGraph graph;
    Manifest manifest;
};

LoadedDataset load_bundle(const std::filesystem::path& dir);

Manifest read_manifest(const std::filesystem::path& path);

// Ground-truth labels as featurize labels; expert_view instead maps expert
// judgements (uninvestigated stays unlabeled).
std::vector<featurize::Label> label_view(const std::vector<ClaimRow>& claims, bool expert_view);

network::HomophilyResult dataset_homophily(const std::vector<ClaimRow>& claims,
                                           const network::BipartiteGraph& graph);

// Final featurization pass over the completed network: BiRank query from the
// chosen label view, features for every claim.
std::vector<featurize::FeatureRow> featurize_dataset(const std::vector<ClaimRow>& claims,
                                                     const network::BipartiteGraph& graph,
                                                     const network::BiRankOptions& options,
                                                     bool expert_view);

// Raw analysis columns for the detection models.
struct AnalysisColumns {
    std::vector<double> age_ph;
    std::vector<double> nr_contracts;
    std::vector<double> claim_amount;
    std::vector<double> claim_age;
    std::vector<double> n1_size;
    std::vector<double> n2_size;
    std::vector<double> n2_ratio_fraud;
    std::vector<int> ground_truth;
    std::vector<investigate::ExpertLabel> expert;
};

AnalysisColumns analysis_columns(const std::vector<ClaimRow>& claims,
                                 const std::vector<featurize::FeatureRow>& features);

struct ModelDefinition {
    std::string id;
    std::vector<std::string> features;
};

// Detection model over policyholder and claim features only.
ModelDefinition model1();
// model1 plus the social-network features.
ModelDefinition model2();

ModelDefinition model_by_id(const std::string& id);

// Fits each model on the investigated claims (response: expert judgement, or
// ground truth in the ground_truth_response variant) and scores the
// uninvestigated claims against ground truth.
std::vector<evaluate::PerformanceReport> run_experiment(const AnalysisColumns& columns,
                                                        const std::vector<ModelDefinition>& models,
                                                        bool ground_truth_response);

// Fit of the data-generating model's specification on all claims against
// ground truth, for coefficient recovery.
evaluate::LogisticFit recover_coefficients(const AnalysisColumns& columns);

} // namespace engine::dataset
