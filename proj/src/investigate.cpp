#include "engine/investigate.hpp"

#include "engine/errors.hpp"

namespace engine::investigate {

std::string to_string(ExpertLabel l) {
    switch (l) {
    case ExpertLabel::uninvestigated: return "uninvestigated";
    case ExpertLabel::fraudulent: return "fraudulent";
    case ExpertLabel::non_fraudulent: return "non-fraudulent";
    }
    return "?";
}

void BusinessRules::validate(std::vector<std::string>& problems) const {
    auto require = [&](bool ok, const char* msg) {
        if (!ok) problems.emplace_back(msg);
    };
    require(recency_years > 0.0, "rules: recency window must be positive");
    require(single_claim_ratio > 0.0, "rules: single claim ratio must be positive");
    require(cumulative_ratio > 0.0, "rules: cumulative ratio must be positive");
    require(expert_tpr >= 0.0 && expert_tpr <= 1.0, "rules: expert TPR must be in [0,1]");
    require(expert_tnr >= 0.0 && expert_tnr <= 1.0, "rules: expert TNR must be in [0,1]");
}

std::vector<bool> flag_suspicious(std::span<const double> amounts, std::span<const double> claim_dates,
                                  double value_car, const BusinessRules& rules) {
    if (amounts.size() != claim_dates.size()) throw ParameterError("flag_suspicious: column lengths differ");
    std::vector<bool> flags(amounts.size(), false);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < amounts.size(); ++k) {
        cumulative += amounts[k];
        bool flag = false;
        if (k > 0 && claim_dates[k] - claim_dates[k - 1] <= rules.recency_years) flag = true;
        if (amounts[k] > rules.single_claim_ratio * value_car) flag = true;
        if (cumulative > rules.cumulative_ratio * value_car) flag = true;
        flags[k] = flag;
    }
    return flags;
}

ExpertLabel expert_judgement(bool ground_truth_fraud, bool flagged, const BusinessRules& rules,
                             rng::RandomStream& stream) {
    if (!flagged) return ExpertLabel::uninvestigated;
    const double u = stream.uniform();
    if (ground_truth_fraud) {
        return (u < rules.expert_tpr) ? ExpertLabel::fraudulent : ExpertLabel::non_fraudulent;
    }
    return (u < 1.0 - rules.expert_tnr) ? ExpertLabel::fraudulent : ExpertLabel::non_fraudulent;
}

} // namespace engine::investigate
