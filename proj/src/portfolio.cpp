#include "engine/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "engine/errors.hpp"
#include "engine/featurize.hpp"

namespace engine::portfolio {

using stochastics::DistributionSpec;

std::string to_string(Gender g) {
    switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::non_binary: return "non-binary";
    }
    return "?";
}

std::string to_string(Coverage c) {
    switch (c) {
    case Coverage::tpl: return "TPL";
    case Coverage::po: return "PO";
    case Coverage::fo: return "FO";
    }
    return "?";
}

std::string to_string(Fuel f) {
    return f == Fuel::diesel ? "diesel" : "gasoline/LPG/other";
}

double contract_rate(double age) {
    return 0.25 * (1.05 - 2.5e-6 * age + 0.0025 * age * age - 2.65e-5 * age * age * age);
}

void PortfolioConfig::validate(std::vector<std::string>& problems) const {
    auto require = [&](bool ok, const char* msg) {
        if (!ok) problems.emplace_back(msg);
    };
    require(n_ph >= 1, "portfolio: n_ph must be at least 1");
    require(min_age < max_age, "portfolio: min_age must be below max_age");
    require(min_exposure < max_exposure, "portfolio: min_exposure must be below max_exposure");
    require(min_contracts >= 1 && min_contracts <= max_contracts,
            "portfolio: contract range must satisfy 1 <= min <= max");
    require(female_threshold >= 0.0 && female_threshold <= male_threshold && male_threshold <= 1.0,
            "portfolio: gender thresholds must satisfy 0 <= female <= male <= 1");
    require(agecar_sd > 0.0, "portfolio: car age sd must be positive");
    require(fuel_diesel_p >= 0.0 && fuel_diesel_p <= 1.0, "portfolio: diesel probability must be in [0,1]");
    require(bonus_malus_rate > 0.0, "portfolio: bonus-malus rate must be positive");
    require(bonus_malus_cap >= 0, "portfolio: bonus-malus cap must be nonnegative");
    require(depreciation_below > 0.0 && depreciation_below < 1.0 && depreciation_above > 0.0 &&
                depreciation_above < 1.0,
            "portfolio: depreciation rates must lie in (0,1)");
    try {
        age_dist.validate();
        exposure_dist.validate();
    } catch (const ParameterError& e) {
        problems.emplace_back(std::string("portfolio: ") + e.what());
    }
    try {
        age_gender.validate();
        age_exposure.validate();
        age_ncontracts.validate();
        agecar_origvalue.validate();
    } catch (const ParameterError& e) {
        problems.emplace_back(std::string("portfolio: ") + e.what());
    }
}

std::vector<double> apply_range_policy(std::span<const double> values, const RangePolicy& policy,
                                       rng::RandomStream& stream) {
    return apply_range_policy(values, policy, {}, stream);
}

std::vector<double> apply_range_policy(std::span<const double> values, const RangePolicy& policy,
                                       std::span<const double> max_per_element,
                                       rng::RandomStream& stream) {
    if (!(policy.min < policy.max)) throw ParameterError("range policy must satisfy min < max");
    if (!max_per_element.empty() && max_per_element.size() != values.size()) {
        throw ParameterError("per-element bounds must match the value count");
    }
    auto upper = [&](std::size_t i) {
        return max_per_element.empty() ? policy.max : std::min(policy.max, max_per_element[i]);
    };
    auto in_range = [&](std::size_t i) {
        return values[i] >= policy.min && values[i] <= upper(i);
    };

    std::vector<double> out(values.begin(), values.end());
    switch (policy.strategy) {
    case RangePolicy::Strategy::clamp:
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::clamp(out[i], policy.min, upper(i));
        }
        return out;
    case RangePolicy::Strategy::redraw_uniform:
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!in_range(i)) {
                auto sub = stream.child(rng::Scope::generic, i);
                const double hi = std::max(upper(i), policy.min);
                out[i] = sub.uniform(policy.min, hi);
            }
        }
        return out;
    case RangePolicy::Strategy::redistribute_integer: {
        // Frequency table of the integer parts of in-range values; the
        // empirical shape inside the range is preserved instead of piling
        // out-of-range mass onto the boundaries.
        std::map<long, std::size_t> freq;
        std::size_t n_in = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (in_range(i)) {
                ++freq[static_cast<long>(std::floor(values[i]))];
                ++n_in;
            }
        }
        if (n_in == 0) {
            throw DegenerateInputError("redistribute range policy requires at least one in-range value");
        }
        std::vector<long> ints;
        std::vector<double> cum;
        ints.reserve(freq.size());
        cum.reserve(freq.size());
        double acc = 0.0;
        for (const auto& [k, c] : freq) {
            acc += static_cast<double>(c) / static_cast<double>(n_in);
            ints.push_back(k);
            cum.push_back(acc);
        }
        cum.back() = 1.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!in_range(i)) {
                auto sub = stream.child(rng::Scope::generic, i);
                const double u = sub.uniform();
                const auto it = std::lower_bound(cum.begin(), cum.end(), u);
                const long base = ints[static_cast<std::size_t>(it - cum.begin())];
                out[i] = std::clamp(static_cast<double>(base) + sub.uniform(), policy.min, upper(i));
            }
        }
        return out;
    }
    }
    throw ParameterError("unknown range policy strategy");
}

std::vector<Policyholder> generate_policyholders(int n_ph, const PortfolioConfig& config,
                                                 rng::RandomStream& stream) {
    if (n_ph < 1) throw ParameterError("n_ph must be at least 1");
    {
        std::vector<std::string> problems;
        config.validate(problems);
        if (!problems.empty()) throw ConfigError(problems.front());
    }

    const std::size_t n = static_cast<std::size_t>(n_ph);
    std::vector<double> ages(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto sub = stream.child(rng::Scope::portfolio_age, i);
        ages[i] = stochastics::quantile(config.age_dist, sub.uniform());
    }
    {
        auto range_stream = stream.child(rng::Scope::portfolio_age_range, 0);
        RangePolicy policy{config.min_age, config.max_age, RangePolicy::Strategy::redistribute_integer};
        ages = apply_range_policy(ages, policy, range_stream);
    }

    auto gender_stream = stream.child(rng::Scope::portfolio_gender, 0);
    const std::vector<double> gender_latent = stochastics::couple_latent(ages, config.age_gender, gender_stream);

    auto exposure_stream = stream.child(rng::Scope::portfolio_exposure, 0);
    const std::vector<double> exposure_latent =
        stochastics::couple_latent(ages, config.age_exposure, exposure_stream);

    auto ncontracts_stream = stream.child(rng::Scope::portfolio_ncontracts, 0);
    const std::vector<double> contracts_latent =
        stochastics::couple_latent(ages, config.age_ncontracts, ncontracts_stream);

    std::vector<Policyholder> out(n);
    auto redraw_stream = stream.child(rng::Scope::portfolio_exposure_redraw, 0);
    for (std::size_t i = 0; i < n; ++i) {
        Policyholder& ph = out[i];
        ph.id = static_cast<int>(i) + 1;
        ph.age = ages[i];

        const double g = gender_latent[i];
        if (g <= config.female_threshold) {
            ph.gender = Gender::female;
        } else if (g <= config.male_threshold) {
            ph.gender = Gender::non_binary;
        } else {
            ph.gender = Gender::male;
        }

        // Exposure cannot reach back before the minimum driving age.
        double exposure = stochastics::quantile(config.exposure_dist, exposure_latent[i]);
        const double max_exp = std::min(config.max_exposure, ph.age - config.min_age);
        if (exposure < config.min_exposure || exposure > max_exp) {
            auto sub = redraw_stream.child(rng::Scope::generic, i);
            exposure = sub.uniform(config.min_exposure, std::max(config.min_exposure, max_exp));
        }
        ph.exposure_years = exposure;

        ph.contract_rate = contract_rate(ph.age);
        int n_contracts = stochastics::poisson_quantile(ph.contract_rate, contracts_latent[i]);
        ph.n_contracts = std::clamp(n_contracts, config.min_contracts, config.max_contracts);
    }
    return out;
}

std::vector<Contract> generate_contracts(const Policyholder& ph, const PortfolioConfig& config,
                                         rng::RandomStream& stream) {
    std::vector<Contract> contracts(static_cast<std::size_t>(ph.n_contracts));
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        Contract& c = contracts[j];
        c.ph_id = ph.id;
        c.index = static_cast<int>(j) + 1;

        if (ph.n_contracts > 1) {
            auto sub = stream.child(rng::Scope::contract_exposure, j);
            c.exposure_years = ph.exposure_years - sub.uniform(0.0, ph.exposure_years / 2.0);
        } else {
            c.exposure_years = ph.exposure_years;
        }

        {
            auto sub = stream.child(rng::Scope::contract_agecar, j);
            const double draw = config.agecar_mean + config.agecar_sd * stochastics::normal_quantile(sub.uniform());
            c.age_car = std::max(draw, c.exposure_years);
        }
        {
            auto sub = stream.child(rng::Scope::contract_fuel, j);
            c.fuel = (sub.uniform() < config.fuel_diesel_p) ? Fuel::diesel : Fuel::gasoline_lpg_other;
        }
        {
            auto sub = stream.child(rng::Scope::contract_bonus_malus, j);
            const double g = stochastics::sample_gamma(1.0, config.bonus_malus_rate, sub);
            c.bonus_malus = std::min(static_cast<int>(std::floor(g)), config.bonus_malus_cap);
        }
    }
    return contracts;
}

std::array<double, 3> coverage_probabilities(double value_car_n, double age_car_n, double age_ph_n,
                                             const PortfolioConfig& config) {
    std::array<double, 3> score{};
    for (std::size_t j = 0; j < 3; ++j) {
        const auto& beta = config.coverage_beta[j];
        score[j] = std::exp(beta[0] * value_car_n + beta[1] * age_car_n + beta[2] * age_ph_n);
    }
    const double total = score[0] + score[1] + score[2];
    return {score[0] / total, score[1] / total, score[2] / total};
}

Coverage simulate_coverage(double value_car_n, double age_car_n, double age_ph_n,
                           const PortfolioConfig& config, rng::RandomStream& stream) {
    const auto probs = coverage_probabilities(value_car_n, age_car_n, age_ph_n, config);
    const std::size_t k =
        stochastics::multinomial_index({probs[0], probs[1], probs[2]}, stream.uniform());
    return static_cast<Coverage>(k);
}

Portfolio generate_portfolio(const PortfolioConfig& config, const rng::RandomStream& master) {
    Portfolio p;
    auto ph_stream = master.child(rng::Scope::generic, 1);
    p.policyholders = generate_policyholders(config.n_ph, config, ph_stream);

    for (const auto& ph : p.policyholders) {
        auto stream = master.child(rng::Scope::contract, static_cast<std::uint64_t>(ph.id));
        auto contracts = generate_contracts(ph, config, stream);
        p.contracts.insert(p.contracts.end(), contracts.begin(), contracts.end());
    }

    // Original car value, negatively rank-coupled to car age across the
    // whole portfolio, with a per-contract exponential marginal.
    std::vector<double> age_cars(p.contracts.size());
    for (std::size_t m = 0; m < p.contracts.size(); ++m) age_cars[m] = p.contracts[m].age_car;
    auto value_stream = master.child(rng::Scope::contract_origvalue, 0);
    const std::vector<double> value_latent =
        stochastics::couple_latent(age_cars, config.agecar_origvalue, value_stream);
    for (std::size_t m = 0; m < p.contracts.size(); ++m) {
        Contract& c = p.contracts[m];
        const Policyholder& ph = p.policyholders[static_cast<std::size_t>(c.ph_id - 1)];
        const double rate = ph.contract_rate / static_cast<double>(ph.n_contracts);
        double upsilon = config.upsilon_nonbinary;
        if (ph.gender == Gender::male) upsilon = config.upsilon_male;
        if (ph.gender == Gender::female) upsilon = config.upsilon_female;
        c.orig_value_car = -std::log1p(-value_latent[m]) / rate * upsilon;
        const double delta = (c.orig_value_car < config.depreciation_threshold) ? config.depreciation_below
                                                                                : config.depreciation_above;
        c.value_car = c.orig_value_car * std::pow(1.0 - delta, c.age_car);
    }

    // Coverage needs covariates normalized over the observed portfolio.
    std::vector<double> values(p.contracts.size()), cars(p.contracts.size()), ages(p.contracts.size());
    for (std::size_t m = 0; m < p.contracts.size(); ++m) {
        values[m] = p.contracts[m].value_car;
        cars[m] = p.contracts[m].age_car;
        ages[m] = p.policyholders[static_cast<std::size_t>(p.contracts[m].ph_id - 1)].age;
    }
    const auto values_n = featurize::normalize_signed_unit_or_zero(values);
    const auto cars_n = featurize::normalize_signed_unit_or_zero(cars);
    const auto ages_n = featurize::normalize_signed_unit_or_zero(ages);
    for (std::size_t m = 0; m < p.contracts.size(); ++m) {
        Contract& c = p.contracts[m];
        auto stream = master.child(rng::Scope::contract_coverage, static_cast<std::uint64_t>(c.ph_id))
                          .child(rng::Scope::generic, static_cast<std::uint64_t>(c.index));
        c.coverage = simulate_coverage(values_n[m], cars_n[m], ages_n[m], config, stream);
    }
    return p;
}

} // namespace engine::portfolio
