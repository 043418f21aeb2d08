#pragma once

#include <string>
#include <vector>

#include "engine/model_spec.hpp"
#include "engine/portfolio.hpp"
#include "engine/rng.hpp"

namespace engine::claims {

struct ClaimsConfig {
    model::ModelSpec frequency;  // Poisson log-link, exposure offset
    model::ModelSpec severity;   // Gamma log-link
    double gamma_shape = 0.25;
    double zeta = 0.0;           // frequency-severity dependence
    double amount_floor = 50.0;
    double floor_replacement_lo = 50.0;
    double floor_replacement_hi = 150.0;
    double claim_age_rate = 0.25; // Exp rate for months to incident
    double police_p = 0.25;
    std::vector<double> npersons_probs; // over {0,...,5}
    model::BinningRule age_ph_bin;
    model::BinningRule age_car_bin;
    model::BinningRule bonus_malus_bin;

    void validate(std::vector<std::string>& problems) const;
};

ClaimsConfig default_claims_config();

model::ModelSpec default_frequency_spec();
model::ModelSpec default_severity_spec();
model::BinningRule default_age_ph_bins();
model::BinningRule default_age_car_bins();
model::BinningRule default_bonus_malus_bins();

// Covariate record for one contract: binned ages and bonus-malus, coverage
// and fuel levels, plus the raw numerics (including the exposure offset).
model::Record contract_record(const portfolio::Policyholder& ph, const portfolio::Contract& c,
                              const ClaimsConfig& config);

// Poisson draw with mean w_ij * exp(eta).
int simulate_claim_count(const portfolio::Policyholder& ph, const portfolio::Contract& c,
                         const ClaimsConfig& config, rng::RandomStream& stream);

// One claim cost: Gamma(shape, shape / exp(eta + N zeta)), floored at
// amount_floor with a U(lo, hi) replacement.
double simulate_claim_amount(const portfolio::Policyholder& ph, const portfolio::Contract& c, int n_ij,
                             const ClaimsConfig& config, rng::RandomStream& stream);

struct ClaimRecord {
    int ph_id = 0;
    int contract_index = 0;      // j within the policyholder
    int k = 0;                   // 1-based, ordered by claim date
    int contract_row = 0;        // row into Portfolio::contracts
    double amount = 0.0;
    int claim_age_months = 0;
    double claim_date_years = 0.0;
    bool police = false;
    int n_persons = 0;
};

// ClaimAge, ClaimDate, Police and nPersons for claim k of a contract.
ClaimRecord generate_claim_attributes(const portfolio::Contract& c, int k, const ClaimsConfig& config,
                                      rng::RandomStream& stream);

// Steps 3-4 over a whole portfolio. Only contracts with at least one claim
// contribute; claims within a contract are sorted by date and reindexed.
std::vector<ClaimRecord> simulate_claims(const portfolio::Portfolio& portfolio, const ClaimsConfig& config,
                                         const rng::RandomStream& master);

} // namespace engine::claims
