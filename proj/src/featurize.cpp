#include "engine/featurize.hpp"

#include <algorithm>
#include <cmath>

#include "engine/errors.hpp"

namespace engine::featurize {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DegenerateInputError("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double midmean_sorted(std::span<const double> sorted) {
    if (sorted.empty()) throw DegenerateInputError("midmean of empty sample");
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);
    double sum = 0.0;
    std::size_t count = 0;
    for (const double x : sorted) {
        if (x >= q1 && x <= q3) {
            sum += x;
            ++count;
        }
    }
    if (count == 0) return quantile_sorted(sorted, 0.5);
    return sum / static_cast<double>(count);
}

namespace {

struct ScoreStats {
    double q1 = 0.0, med = 0.0, midmean = 0.0;
};

ScoreStats stats_of(std::vector<double>& values) {
    ScoreStats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.q1 = quantile_sorted(values, 0.25);
    s.med = quantile_sorted(values, 0.5);
    s.midmean = midmean_sorted(values);
    return s;
}

} // namespace

void fill_score_features(const network::BipartiteGraph& graph, const network::ClaimProjection& projection,
                         const network::BiRankResult& scores, int claim, FeatureRow& row) {
    row.scores0 = scores.claim_scores.at(static_cast<std::size_t>(claim));

    std::vector<double> n1;
    for (const std::int32_t p : graph.claim_parties(claim)) {
        n1.push_back(scores.party_scores[static_cast<std::size_t>(p)]);
    }
    const ScoreStats s1 = stats_of(n1);
    row.n1_q1 = s1.q1;
    row.n1_med = s1.med;
    row.n1_midmean = s1.midmean;

    std::vector<double> n2;
    for (const std::int32_t c : projection.neighbors(claim)) {
        n2.push_back(scores.claim_scores[static_cast<std::size_t>(c)]);
    }
    const ScoreStats s2 = stats_of(n2);
    row.n2_q1 = s2.q1;
    row.n2_med = s2.med;
    row.n2_midmean = s2.midmean;
}

void fill_neighborhood_features(const network::BipartiteGraph& graph,
                                const network::ClaimProjection& projection,
                                std::span<const Label> labels, int claim, FeatureRow& row) {
    row.n1_size = graph.claim_degree(claim);
    const auto n2 = projection.neighbors(claim);
    row.n2_size = static_cast<int>(n2.size());
    if (n2.empty()) {
        row.n2_ratio_fraud = 0.0;
        row.n2_ratio_nonfraud = 0.0;
        row.n2_bin_fraud = false;
        return;
    }
    std::size_t fraud = 0, nonfraud = 0;
    for (const std::int32_t c : n2) {
        const Label l = labels[static_cast<std::size_t>(c)];
        if (l == Label::fraud) ++fraud;
        if (l == Label::nonfraud) ++nonfraud;
    }
    row.n2_ratio_fraud = static_cast<double>(fraud) / static_cast<double>(n2.size());
    row.n2_ratio_nonfraud = static_cast<double>(nonfraud) / static_cast<double>(n2.size());
    row.n2_bin_fraud = fraud > 0;
}

FeatureRow features_for_claim(const network::BipartiteGraph& graph,
                              const network::ClaimProjection& projection,
                              const network::BiRankResult* scores, std::span<const Label> labels,
                              int claim) {
    FeatureRow row;
    if (scores) fill_score_features(graph, projection, *scores, claim, row);
    fill_neighborhood_features(graph, projection, labels, claim, row);
    return row;
}

std::vector<double> normalize_signed_unit(std::span<const double> values) {
    if (values.empty()) throw DegenerateInputError("normalize_signed_unit: empty input");
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn)) throw DegenerateInputError("normalize_signed_unit: constant input");
    std::vector<double> out(values.size());
    const double scale = 2.0 / (mx - mn);
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mn) * scale - 1.0;
    return out;
}

std::vector<double> normalize_signed_unit_or_zero(std::span<const double> values) {
    try {
        return normalize_signed_unit(values);
    } catch (const DegenerateInputError&) {
        return std::vector<double>(values.size(), 0.0);
    }
}

} // namespace engine::featurize
