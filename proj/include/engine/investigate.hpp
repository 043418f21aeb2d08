#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "engine/rng.hpp"

namespace engine::investigate {

enum class ExpertLabel : std::uint8_t { uninvestigated = 0, fraudulent = 1, non_fraudulent = 2 };

std::string to_string(ExpertLabel l);

struct BusinessRules {
    double recency_years = 1.0;        // (a) filed within a year of the previous claim
    double single_claim_ratio = 0.75;  // (b) amount > ratio * car value
    double cumulative_ratio = 2.00;    // (c) running total > ratio * car value
    double expert_tpr = 0.99;          // flagged fraud judged fraudulent
    double expert_tnr = 0.99;          // flagged non-fraud judged non-fraudulent

    // Car value the amount rules compare against. The depreciated current
    // value inflates the flagged share far beyond the share of claims an
    // insurer investigates; the original value reproduces it.
    enum class ValueBasis { original, current };
    ValueBasis value_basis = ValueBasis::original;

    void validate(std::vector<std::string>& problems) const;
};

// Flags for the claims of a single contract, ordered by claim date. The
// first claim can only be flagged by the amount rules. `value_car` must be
// the contract value matching rules.value_basis.
std::vector<bool> flag_suspicious(std::span<const double> amounts, std::span<const double> claim_dates,
                                  double value_car, const BusinessRules& rules);

// Expert judgement for one claim: unflagged claims stay uninvestigated,
// flagged claims get a noisy read of the ground truth.
ExpertLabel expert_judgement(bool ground_truth_fraud, bool flagged, const BusinessRules& rules,
                             rng::RandomStream& stream);

} // namespace engine::investigate
