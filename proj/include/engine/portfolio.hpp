#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "engine/copula.hpp"
#include "engine/distributions.hpp"
#include "engine/rng.hpp"

namespace engine::portfolio {

enum class Gender { female, male, non_binary };
enum class Coverage { tpl, po, fo };
enum class Fuel { gasoline_lpg_other, diesel };

std::string to_string(Gender g);
std::string to_string(Coverage c);
std::string to_string(Fuel f);

struct Policyholder {
    int id = 0;                  // 1-based
    double age = 0.0;            // years
    Gender gender = Gender::female;
    double exposure_years = 0.0; // w_i, years since first contract inception
    double contract_rate = 0.0;  // lambda_i
    int n_contracts = 0;
};

struct Contract {
    int ph_id = 0;
    int index = 0;               // j, 1-based within the policyholder
    double exposure_years = 0.0; // w_ij
    double age_car = 0.0;
    double orig_value_car = 0.0;
    double value_car = 0.0;
    Coverage coverage = Coverage::tpl;
    Fuel fuel = Fuel::gasoline_lpg_other;
    int bonus_malus = 0;
};

// Cubic rate curve for the number of contracts as a function of age.
double contract_rate(double age);

struct RangePolicy {
    enum class Strategy { redistribute_integer, redraw_uniform, clamp };

    double min = 0.0;
    double max = 1.0;
    Strategy strategy = Strategy::clamp;
};

// Forces all values into [policy.min, policy.max].
//  - redistribute_integer: out-of-range values are replaced by an integer
//    drawn proportionally to the frequency of in-range integer parts, plus
//    U(0,1) jitter; in-range values pass through untouched.
//  - redraw_uniform: out-of-range values are redrawn from U(min, max). The
//    overload with max_per_element uses min(policy.max, max_per_element[i])
//    as the upper bound for element i.
//  - clamp: out-of-range values map to the nearest bound.
std::vector<double> apply_range_policy(std::span<const double> values, const RangePolicy& policy,
                                       rng::RandomStream& stream);
std::vector<double> apply_range_policy(std::span<const double> values, const RangePolicy& policy,
                                       std::span<const double> max_per_element,
                                       rng::RandomStream& stream);

struct PortfolioConfig {
    int n_ph = 10000;

    double min_age = 18.0;
    double max_age = 80.0;
    stochastics::DistributionSpec age_dist = stochastics::DistributionSpec::normal(40.0, 15.0);

    double female_threshold = 0.28;   // u <= 0.28 -> female
    double male_threshold = 0.29;     // u > 0.29 -> male, otherwise non-binary

    double min_exposure = 0.0;
    double max_exposure = 20.0;
    stochastics::DistributionSpec exposure_dist = stochastics::DistributionSpec::normal(5.0, 1.5);

    int min_contracts = 1;
    int max_contracts = 5;

    stochastics::CopulaSpec age_gender = stochastics::CopulaSpec::amh(-0.15);
    stochastics::CopulaSpec age_exposure = stochastics::CopulaSpec::amh(0.15);
    stochastics::CopulaSpec age_ncontracts = stochastics::CopulaSpec::amh(0.95);
    stochastics::CopulaSpec agecar_origvalue = stochastics::CopulaSpec::frank(-25.0);

    double agecar_mean = 7.5;
    double agecar_sd = std::sqrt(5.0);

    double upsilon_male = 25000.0;
    double upsilon_female = 20000.0;
    double upsilon_nonbinary = 22500.0;

    double depreciation_below = 0.15;      // orig value < threshold
    double depreciation_above = 0.075;     // orig value >= threshold
    double depreciation_threshold = 30000.0;

    double fuel_diesel_p = 0.3;

    double bonus_malus_rate = 1.0 / 3.0;   // Gamma(1, rate), i.e. exponential
    int bonus_malus_cap = 22;

    // Multinomial coverage coefficients, rows TPL/PO/FO over the normalized
    // covariates (value_car, age_car, age_ph).
    std::array<std::array<double, 3>, 3> coverage_beta = {{
        {std::log(0.50), std::log(1.25), std::log(0.25)},
        {std::log(1.25), std::log(0.75), std::log(1.05)},
        {std::log(1.50), std::log(0.75), std::log(1.25)},
    }};

    void validate(std::vector<std::string>& problems) const;
};

std::vector<Policyholder> generate_policyholders(int n_ph, const PortfolioConfig& config,
                                                 rng::RandomStream& stream);

// Per-policyholder contract fields that do not require portfolio-wide
// passes: exposure, car age, fuel, bonus-malus. Car value and coverage are
// completed by generate_portfolio, which needs the full portfolio for the
// rank coupling and the covariate normalization.
std::vector<Contract> generate_contracts(const Policyholder& ph, const PortfolioConfig& config,
                                         rng::RandomStream& stream);

// Draw a coverage level given covariates normalized to [-1, 1].
Coverage simulate_coverage(double value_car_n, double age_car_n, double age_ph_n,
                           const PortfolioConfig& config, rng::RandomStream& stream);

// Coverage probabilities for normalized covariates (softmax over the three
// coefficient vectors), exposed for tests.
std::array<double, 3> coverage_probabilities(double value_car_n, double age_car_n, double age_ph_n,
                                             const PortfolioConfig& config);

struct Portfolio {
    std::vector<Policyholder> policyholders;
    std::vector<Contract> contracts;
};

// Runs the full two-phase pipeline: policyholders, contracts, the rank-based
// car-age/original-value coupling, depreciation and coverage simulation.
Portfolio generate_portfolio(const PortfolioConfig& config, const rng::RandomStream& master);

} // namespace engine::portfolio
