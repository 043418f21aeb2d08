#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "engine/claims.hpp"
#include "engine/investigate.hpp"
#include "engine/labeling.hpp"
#include "engine/network.hpp"
#include "engine/portfolio.hpp"

namespace engine::config {

inline constexpr const char* kEngineVersion = "0.1.0";

// Pool sizes below zero mean "derive the default from n_ph":
// experts 1%, brokers 1%, garages 3%, persons 150%.
struct PartyPoolSettings {
    int n_experts = -1;
    int n_brokers = -1;
    int n_garages = -1;
    int n_persons = -1;
    std::set<network::PartyKind> excluded = {network::PartyKind::expert};
    double expert_amount_threshold = 250.0;
};

struct EngineConfig {
    std::uint64_t master_seed = 1;
    portfolio::PortfolioConfig portfolio;
    claims::ClaimsConfig claims = claims::default_claims_config();
    PartyPoolSettings pools;
    model::ModelSpec fraud;
    labeling::LabelingConfig labeling;
    labeling::ImbalanceTarget imbalance;
    investigate::BusinessRules rules;
    bool evaluation_features_expert_view = false;

    network::PartyPoolsConfig resolved_pools() const;

    // Collects every violated constraint; empty means valid.
    std::vector<std::string> validate() const;

    std::string serialize() const;
    std::string content_hash() const; // FNV-1a of the canonical serialization, hex

    static EngineConfig defaults();
    static EngineConfig from_toml(const std::string& text);
    static EngineConfig from_file(const std::filesystem::path& path);
};

// Data-generating fraud model coefficients; with_network_effects=false zeroes
// the social-network terms (the coefficients stay listed so the two variants
// differ only in effect size).
model::ModelSpec default_fraud_spec(bool with_network_effects);

int engine_threads();

} // namespace engine::config
