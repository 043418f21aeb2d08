#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "engine/rng.hpp"

namespace engine::network {

enum class PartyKind : std::uint8_t { policyholder, garage, broker, expert, person };

std::string to_string(PartyKind k);

struct PartyPoolsConfig {
    int n_garages = 0;
    int n_brokers = 0;
    int n_experts = 0;
    int n_persons = 0;
    std::set<PartyKind> excluded = {PartyKind::expert};
    double expert_amount_threshold = 250.0;
};

struct Party {
    PartyKind kind;
    int label; // policyholder id, or 1-based index within the pool
};

struct Edge {
    int claim;
    int party;
    double weight = 1.0;
};

// Undirected bipartite claim-party graph stored as CSR in both directions.
// Only parties with at least one edge are materialized; the unweighted case
// has every weight equal to one.
class BipartiteGraph {
public:
    BipartiteGraph(int n_claims, std::vector<Party> parties, const std::vector<Edge>& edges);

    int n_claims() const { return n_claims_; }
    int n_parties() const { return static_cast<int>(parties_.size()); }
    std::size_t n_edges() const { return claim_cols_.size(); }

    std::span<const std::int32_t> claim_parties(int claim) const;
    std::span<const std::int32_t> party_claims(int party) const;
    double claim_party_weight(int claim, std::size_t k) const;

    int claim_degree(int claim) const;
    int party_degree(int party) const;
    const Party& party(int p) const { return parties_.at(static_cast<std::size_t>(p)); }

    // First-order neighborhood: the parties incident to the claim.
    std::vector<int> neighborhood1(int claim) const;
    // Second-order neighborhood: claims sharing at least one party,
    // excluding the claim itself. Set semantics.
    std::vector<int> neighborhood2(int claim) const;

    const std::vector<std::int64_t>& claim_indptr() const { return claim_indptr_; }
    const std::vector<std::int32_t>& claim_cols() const { return claim_cols_; }

private:
    void check_claim(int claim) const;
    void check_party(int party) const;

    int n_claims_;
    std::vector<Party> parties_;
    std::vector<std::int64_t> claim_indptr_;
    std::vector<std::int32_t> claim_cols_;
    std::vector<double> claim_vals_;
    std::vector<std::int64_t> party_indptr_;
    std::vector<std::int32_t> party_cols_;
    std::vector<double> party_vals_;
};

// Claim-claim projection: two claims are adjacent iff they share at least
// one party (unweighted, deduplicated). Doubles as the cache of second-order
// neighborhoods.
class ClaimProjection {
public:
    explicit ClaimProjection(const BipartiteGraph& graph);

    std::span<const std::int32_t> neighbors(int claim) const;
    std::size_t pair_count() const { return pair_count_; } // unordered adjacent pairs
    int n_claims() const { return static_cast<int>(indptr_.size()) - 1; }

private:
    std::vector<std::int64_t> indptr_;
    std::vector<std::int32_t> cols_;
    std::size_t pair_count_ = 0;
};

// Links every claim to its policyholder, one garage, one broker, n_persons
// distinct persons, and one expert when the claim amount reaches the
// threshold and experts are not excluded.
BipartiteGraph assign_parties(std::span<const int> claim_ph_ids, std::span<const double> amounts,
                              std::span<const int> n_persons, const PartyPoolsConfig& pools,
                              rng::RandomStream& stream);

struct BiRankOptions {
    double alpha = 0.85;
    double tolerance = 1e-9;
    int max_iterations = 1000;
};

struct BiRankResult {
    std::vector<double> claim_scores;
    std::vector<double> party_scores;
    int iterations = 0;
    bool converged = false;
};

// Iterative bipartite ranking with symmetric degree normalization:
//   c <- alpha * S p + (1 - alpha) * c0,   p <- S^T c
// with S = D_P^{-1/2} W D_C^{-1/2} and the convention d^{-1/2} = 0 for
// zero-degree nodes. Deterministic uniform initialization; the fixed point
// is unique for alpha < 1.
BiRankResult birank(const BipartiteGraph& graph, std::span<const double> query_claims,
                    const BiRankOptions& options = {});

struct HomophilyResult {
    std::optional<double> dyadicity;
    std::optional<double> heterophilicity;
    std::size_t m11 = 0;
    std::size_t m10 = 0;
    std::size_t m00 = 0;
    std::size_t projected_edges = 0;
    double rho = 0.0;
    std::size_t n_fraud = 0;
    std::size_t n_claims = 0;
};

// Dyad counts on the claim projection with the one-versus-all grouping:
// label true = fraudulent, false = everything else. Expected counts under
// random labeling use rho = 2|E| / (n_C (n_C - 1)) with |E| the projected
// edge count. Metrics whose expectation is degenerate are reported absent.
HomophilyResult homophily_metrics(const ClaimProjection& projection, std::span<const std::uint8_t> fraud);
HomophilyResult homophily_metrics(const BipartiteGraph& graph, std::span<const std::uint8_t> fraud);

} // namespace engine::network
