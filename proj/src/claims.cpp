#include "engine/claims.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "engine/distributions.hpp"
#include "engine/errors.hpp"

namespace engine::claims {

using model::BinningRule;
using model::ModelSpec;
using model::ModelTerm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelTerm cat(std::string feature, std::string level, double coefficient) {
    return ModelTerm{std::move(feature), std::move(level), coefficient};
}

std::vector<double> normalized_npersons_probs(const ClaimsConfig& config) {
    std::vector<double> probs = config.npersons_probs;
    double total = 0.0;
    for (const double p : probs) {
        if (!(p >= 0.0)) throw ParameterError("nPersons weights must be nonnegative");
        total += p;
    }
    if (!(total > 0.0)) throw ParameterError("nPersons weights must not all be zero");
    for (double& p : probs) p /= total;
    return probs;
}

} // namespace

model::BinningRule default_age_ph_bins() {
    return BinningRule{"AgePHBin", {18, 26, 30, 36, 50, 60, 65, 70, 80}, BinningRule::Closure::right_closed};
}

model::BinningRule default_age_car_bins() {
    return BinningRule{"AgeCarBin", {0, 5, 10, 20, kInf}, BinningRule::Closure::right_closed};
}

model::BinningRule default_bonus_malus_bins() {
    return BinningRule{"BonusMalusBin", {0, 1, 2, 3, 7, 9, 11, 22}, BinningRule::Closure::left_closed};
}

model::ModelSpec default_frequency_spec() {
    ModelSpec spec;
    spec.intercept = -2.18;
    spec.offset_feature = "ExpPHContracts";
    spec.terms = {
        cat("AgePHBin", "(26,30]", std::log(0.85)),
        cat("AgePHBin", "(30,36]", std::log(0.75)),
        cat("AgePHBin", "(36,50]", std::log(0.70)),
        cat("AgePHBin", "(50,60]", std::log(0.60)),
        cat("AgePHBin", "(60,65]", std::log(0.55)),
        cat("AgePHBin", "(65,70]", std::log(0.60)),
        cat("AgePHBin", "(70,80]", std::log(0.70)),
        cat("Coverage", "PO", -0.12),
        cat("Coverage", "FO", -0.11),
        cat("AgeCarBin", "(5,10]", std::log(0.90)),
        cat("AgeCarBin", "(10,20]", std::log(0.80)),
        cat("AgeCarBin", "(20,max]", std::log(0.60)),
        cat("Fuel", "diesel", std::log(1.19)),
        cat("BonusMalusBin", "[1,2)", 0.12),
        cat("BonusMalusBin", "[2,3)", 0.18),
        cat("BonusMalusBin", "[3,7)", 0.34),
        cat("BonusMalusBin", "[7,9)", 0.48),
        cat("BonusMalusBin", "[9,11)", 0.54),
        cat("BonusMalusBin", "[11,22]", 0.78),
    };
    return spec;
}

model::ModelSpec default_severity_spec() {
    ModelSpec spec;
    spec.intercept = 6.06;
    spec.terms = {
        cat("AgePHBin", "(26,30]", std::log(0.85)),
        cat("AgePHBin", "(30,36]", std::log(0.75)),
        cat("AgePHBin", "(36,50]", std::log(0.85)),
        cat("AgePHBin", "(50,60]", std::log(0.85)),
        cat("AgePHBin", "(60,65]", std::log(1.15)),
        cat("AgePHBin", "(65,70]", std::log(1.25)),
        cat("AgePHBin", "(70,80]", std::log(1.50)),
        cat("Coverage", "PO", -0.16),
        cat("Coverage", "FO", 0.11),
        cat("BonusMalusBin", "[1,2)", 0.10),
        cat("BonusMalusBin", "[2,3)", 0.15),
        cat("BonusMalusBin", "[3,7)", 0.15),
        cat("BonusMalusBin", "[7,9)", 0.15),
        cat("BonusMalusBin", "[9,11)", 0.20),
        cat("BonusMalusBin", "[11,22]", 0.30),
    };
    return spec;
}

ClaimsConfig default_claims_config() {
    ClaimsConfig config;
    config.frequency = default_frequency_spec();
    config.severity = default_severity_spec();
    // stated proportions sum to 1.05; renormalized at draw time
    config.npersons_probs = {0.025, 0.6, 0.2, 0.1, 0.1, 0.025};
    config.age_ph_bin = default_age_ph_bins();
    config.age_car_bin = default_age_car_bins();
    config.bonus_malus_bin = default_bonus_malus_bins();
    return config;
}

void ClaimsConfig::validate(std::vector<std::string>& problems) const {
    auto require = [&](bool ok, const char* msg) {
        if (!ok) problems.emplace_back(msg);
    };
    require(gamma_shape > 0.0, "claims: gamma shape must be positive");
    require(amount_floor >= 0.0, "claims: amount floor must be nonnegative");
    require(floor_replacement_lo <= floor_replacement_hi, "claims: floor replacement bounds inverted");
    require(claim_age_rate > 0.0, "claims: claim age rate must be positive");
    require(police_p >= 0.0 && police_p <= 1.0, "claims: police probability must be in [0,1]");
    try {
        stochastics::DistributionSpec::multinomial(normalized_npersons_probs(*this)).validate();
    } catch (const ParameterError& e) {
        problems.emplace_back(std::string("claims: nPersons ") + e.what());
    }
    try {
        age_ph_bin.validate();
        age_car_bin.validate();
        bonus_malus_bin.validate();
    } catch (const ParameterError& e) {
        problems.emplace_back(std::string("claims: ") + e.what());
    }
}

model::Record contract_record(const portfolio::Policyholder& ph, const portfolio::Contract& c,
                              const ClaimsConfig& config) {
    model::Record r;
    r.set("AgePH", ph.age);
    r.set("AgePHBin", model::bin_feature(ph.age, config.age_ph_bin));
    r.set("NrContractsPH", static_cast<double>(ph.n_contracts));
    r.set("ExpPH", ph.exposure_years);
    r.set("GenderPH", portfolio::to_string(ph.gender));
    r.set("ExpPHContracts", c.exposure_years);
    r.set("AgeCar", c.age_car);
    r.set("AgeCarBin", model::bin_feature(c.age_car, config.age_car_bin));
    r.set("OrigValueCar", c.orig_value_car);
    r.set("ValueCar", c.value_car);
    r.set("Coverage", portfolio::to_string(c.coverage));
    r.set("Fuel", c.fuel == portfolio::Fuel::diesel ? "diesel" : "gasoline/LPG/other");
    r.set("BonusMalus", static_cast<double>(c.bonus_malus));
    r.set("BonusMalusBin", model::bin_feature(static_cast<double>(c.bonus_malus), config.bonus_malus_bin));
    return r;
}

int simulate_claim_count(const portfolio::Policyholder& ph, const portfolio::Contract& c,
                         const ClaimsConfig& config, rng::RandomStream& stream) {
    if (!(c.exposure_years > 0.0)) throw ParameterError("claim count requires positive contract exposure");
    const model::Record record = contract_record(ph, c, config);
    const double eta = model::linear_predictor(config.frequency, record);
    double offset = 1.0;
    if (config.frequency.offset_feature) offset = record.number(*config.frequency.offset_feature);
    const double mean = offset * std::exp(eta);
    return stochastics::poisson_quantile(mean, stream.uniform());
}

double simulate_claim_amount(const portfolio::Policyholder& ph, const portfolio::Contract& c, int n_ij,
                             const ClaimsConfig& config, rng::RandomStream& stream) {
    if (n_ij < 1) throw ParameterError("claim amount requires at least one claim on the contract");
    const model::Record record = contract_record(ph, c, config);
    const double eta = model::linear_predictor(config.severity, record) + n_ij * config.zeta;
    const double mean = std::exp(eta);
    double amount = stochastics::sample_gamma(config.gamma_shape, config.gamma_shape / mean, stream);
    if (amount < config.amount_floor) {
        amount = stream.uniform(config.floor_replacement_lo, config.floor_replacement_hi);
    }
    return amount;
}

ClaimRecord generate_claim_attributes(const portfolio::Contract& c, int k, const ClaimsConfig& config,
                                      rng::RandomStream& stream) {
    ClaimRecord rec;
    rec.ph_id = c.ph_id;
    rec.contract_index = c.index;
    rec.k = k;
    {
        auto sub = stream.child(rng::Scope::claim_age, 0);
        const double months = -std::log1p(-sub.uniform()) / config.claim_age_rate;
        // cap keeps ClaimDate >= ClaimAge/12 satisfiable inside the contract
        const int max_months = static_cast<int>(std::floor(c.exposure_years * 12.0));
        rec.claim_age_months = std::min(static_cast<int>(std::floor(months)), max_months);
    }
    {
        auto sub = stream.child(rng::Scope::claim_date, 0);
        rec.claim_date_years =
            std::max(sub.uniform(0.0, c.exposure_years), static_cast<double>(rec.claim_age_months) / 12.0);
    }
    {
        auto sub = stream.child(rng::Scope::claim_police, 0);
        rec.police = sub.uniform() < config.police_p;
    }
    {
        auto sub = stream.child(rng::Scope::claim_npersons, 0);
        rec.n_persons =
            static_cast<int>(stochastics::multinomial_index(normalized_npersons_probs(config), sub.uniform()));
    }
    return rec;
}

std::vector<ClaimRecord> simulate_claims(const portfolio::Portfolio& portfolio, const ClaimsConfig& config,
                                         const rng::RandomStream& master) {
    std::vector<ClaimRecord> claims;
    for (std::size_t row = 0; row < portfolio.contracts.size(); ++row) {
        const portfolio::Contract& c = portfolio.contracts[row];
        const portfolio::Policyholder& ph =
            portfolio.policyholders[static_cast<std::size_t>(c.ph_id - 1)];
        auto contract_stream = master.child(rng::Scope::claim_count, static_cast<std::uint64_t>(c.ph_id))
                                   .child(rng::Scope::generic, static_cast<std::uint64_t>(c.index));
        int n = 0;
        {
            auto sub = contract_stream.child(rng::Scope::claim_count, 0);
            n = simulate_claim_count(ph, c, config, sub);
        }
        if (n < 1) continue;

        std::vector<ClaimRecord> contract_claims;
        contract_claims.reserve(static_cast<std::size_t>(n));
        for (int k = 1; k <= n; ++k) {
            auto claim_stream = contract_stream.child(rng::Scope::generic, static_cast<std::uint64_t>(k));
            ClaimRecord rec = generate_claim_attributes(c, k, config, claim_stream);
            rec.contract_row = static_cast<int>(row);
            {
                auto sub = claim_stream.child(rng::Scope::claim_amount, 0);
                rec.amount = simulate_claim_amount(ph, c, n, config, sub);
            }
            contract_claims.push_back(rec);
        }
        std::stable_sort(contract_claims.begin(), contract_claims.end(),
                         [](const ClaimRecord& a, const ClaimRecord& b) {
                             return a.claim_date_years < b.claim_date_years;
                         });
        for (std::size_t k = 0; k < contract_claims.size(); ++k) {
            contract_claims[k].k = static_cast<int>(k) + 1;
        }
        claims.insert(claims.end(), contract_claims.begin(), contract_claims.end());
    }
    return claims;
}

} // namespace engine::claims
