#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "engine/network.hpp"

namespace engine::featurize {

enum class Label : std::uint8_t { unlabeled = 0, fraud = 1, nonfraud = 2 };

// The twelve social-network features of one claim. Sizes are neighborhood
// cardinalities; the score statistics summarize BiRank scores over the first
// (party scores) and second (claim scores) order neighborhoods. Empty
// neighborhoods yield 0 for every statistic.
struct FeatureRow {
    double scores0 = 0.0;
    double n1_q1 = 0.0;
    double n1_med = 0.0;
    double n1_midmean = 0.0;
    double n2_q1 = 0.0;
    double n2_med = 0.0;
    double n2_midmean = 0.0;
    int n1_size = 0;
    int n2_size = 0;
    double n2_ratio_fraud = 0.0;
    double n2_ratio_nonfraud = 0.0;
    bool n2_bin_fraud = false;
};

// Column names as emitted in feature tables.
inline constexpr std::array<const char*, 12> kFeatureNames = {
    "scores0", "n1.q1", "n1.med", "n1.midmean", "n2.q1", "n2.med", "n2.midmean",
    "n1.size", "n2.size", "n2.ratioFraud", "n2.ratioNonFraud", "n2.binFraud"};

// Quantile with linear interpolation between order statistics at position
// (n-1)q; input must be sorted ascending.
double quantile_sorted(std::span<const double> sorted, double q);

// Interquartile mean: the average of the observations x with Q1 <= x <= Q3;
// when that set is empty (possible for n = 2) the median is used instead.
double midmean_sorted(std::span<const double> sorted);

// Fills scores0 and the six neighborhood score statistics.
void fill_score_features(const network::BipartiteGraph& graph, const network::ClaimProjection& projection,
                         const network::BiRankResult& scores, int claim, FeatureRow& row);

// Fills sizes, label ratios and the fraud indicator. Ratios count only
// claims whose label is known; unlabeled neighbors contribute to n2.size but
// to neither ratio.
void fill_neighborhood_features(const network::BipartiteGraph& graph,
                                const network::ClaimProjection& projection,
                                std::span<const Label> labels, int claim, FeatureRow& row);

// Convenience: both fills. `scores` may be null when no score features are
// required; the score fields stay at 0.
FeatureRow features_for_claim(const network::BipartiteGraph& graph,
                              const network::ClaimProjection& projection,
                              const network::BiRankResult* scores, std::span<const Label> labels,
                              int claim);

// Affine map of a vector onto [-1, 1]: min -> -1, max -> +1. Throws
// DegenerateInputError when the input is constant.
std::vector<double> normalize_signed_unit(std::span<const double> values);

// Same map, substituting 0 for every entry of a constant vector.
std::vector<double> normalize_signed_unit_or_zero(std::span<const double> values);

} // namespace engine::featurize
