#include "engine/network.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "engine/errors.hpp"
#include "engine/kernels.hpp"

namespace engine::network {

std::string to_string(PartyKind k) {
    switch (k) {
    case PartyKind::policyholder: return "policyholder";
    case PartyKind::garage: return "garage";
    case PartyKind::broker: return "broker";
    case PartyKind::expert: return "expert";
    case PartyKind::person: return "person";
    }
    return "?";
}

namespace {

void build_csr(int n_rows, const std::vector<Edge>& edges, bool by_claim,
               std::vector<std::int64_t>& indptr, std::vector<std::int32_t>& cols,
               std::vector<double>& vals) {
    indptr.assign(static_cast<std::size_t>(n_rows) + 1, 0);
    for (const Edge& e : edges) {
        const int r = by_claim ? e.claim : e.party;
        ++indptr[static_cast<std::size_t>(r) + 1];
    }
    for (std::size_t i = 1; i < indptr.size(); ++i) indptr[i] += indptr[i - 1];
    cols.resize(edges.size());
    vals.resize(edges.size());
    std::vector<std::int64_t> cursor(indptr.begin(), indptr.end() - 1);
    for (const Edge& e : edges) {
        const int r = by_claim ? e.claim : e.party;
        const int c = by_claim ? e.party : e.claim;
        const std::int64_t k = cursor[static_cast<std::size_t>(r)]++;
        cols[static_cast<std::size_t>(k)] = c;
        vals[static_cast<std::size_t>(k)] = e.weight;
    }
}

} // namespace

BipartiteGraph::BipartiteGraph(int n_claims, std::vector<Party> parties, const std::vector<Edge>& edges)
    : n_claims_(n_claims), parties_(std::move(parties)) {
    for (const Edge& e : edges) {
        if (e.claim < 0 || e.claim >= n_claims_) throw LookupError("edge references unknown claim");
        if (e.party < 0 || e.party >= n_parties()) throw LookupError("edge references unknown party");
        if (!std::isfinite(e.weight) || e.weight < 0.0) throw ParameterError("edge weights must be finite and nonnegative");
    }
    build_csr(n_claims_, edges, true, claim_indptr_, claim_cols_, claim_vals_);
    build_csr(n_parties(), edges, false, party_indptr_, party_cols_, party_vals_);
}

void BipartiteGraph::check_claim(int claim) const {
    if (claim < 0 || claim >= n_claims_) throw LookupError("unknown claim node");
}

void BipartiteGraph::check_party(int party) const {
    if (party < 0 || party >= n_parties()) throw LookupError("unknown party node");
}

std::span<const std::int32_t> BipartiteGraph::claim_parties(int claim) const {
    check_claim(claim);
    const auto b = static_cast<std::size_t>(claim_indptr_[claim]);
    const auto e = static_cast<std::size_t>(claim_indptr_[claim + 1]);
    return {claim_cols_.data() + b, e - b};
}

std::span<const std::int32_t> BipartiteGraph::party_claims(int party) const {
    check_party(party);
    const auto b = static_cast<std::size_t>(party_indptr_[party]);
    const auto e = static_cast<std::size_t>(party_indptr_[party + 1]);
    return {party_cols_.data() + b, e - b};
}

double BipartiteGraph::claim_party_weight(int claim, std::size_t k) const {
    check_claim(claim);
    return claim_vals_[static_cast<std::size_t>(claim_indptr_[claim]) + k];
}

int BipartiteGraph::claim_degree(int claim) const {
    check_claim(claim);
    return static_cast<int>(claim_indptr_[claim + 1] - claim_indptr_[claim]);
}

int BipartiteGraph::party_degree(int party) const {
    check_party(party);
    return static_cast<int>(party_indptr_[party + 1] - party_indptr_[party]);
}

std::vector<int> BipartiteGraph::neighborhood1(int claim) const {
    const auto parties = claim_parties(claim);
    std::vector<int> out(parties.begin(), parties.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> BipartiteGraph::neighborhood2(int claim) const {
    std::vector<int> out;
    for (const std::int32_t p : claim_parties(claim)) {
        const auto claims = party_claims(p);
        out.insert(out.end(), claims.begin(), claims.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove(out.begin(), out.end(), claim), out.end());
    return out;
}

ClaimProjection::ClaimProjection(const BipartiteGraph& graph) {
    const int n = graph.n_claims();
    std::vector<std::vector<std::int32_t>> adj(static_cast<std::size_t>(n));
    for (int p = 0; p < graph.n_parties(); ++p) {
        const auto claims = graph.party_claims(p);
        for (std::size_t a = 0; a < claims.size(); ++a) {
            for (std::size_t b = a + 1; b < claims.size(); ++b) {
                if (claims[a] == claims[b]) continue;
                adj[static_cast<std::size_t>(claims[a])].push_back(claims[b]);
                adj[static_cast<std::size_t>(claims[b])].push_back(claims[a]);
            }
        }
    }
    indptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    std::size_t total = 0;
    for (int c = 0; c < n; ++c) {
        auto& v = adj[static_cast<std::size_t>(c)];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        total += v.size();
        indptr_[static_cast<std::size_t>(c) + 1] = static_cast<std::int64_t>(total);
    }
    cols_.reserve(total);
    for (int c = 0; c < n; ++c) {
        const auto& v = adj[static_cast<std::size_t>(c)];
        cols_.insert(cols_.end(), v.begin(), v.end());
    }
    pair_count_ = total / 2;
}

std::span<const std::int32_t> ClaimProjection::neighbors(int claim) const {
    if (claim < 0 || claim + 1 >= static_cast<int>(indptr_.size())) throw LookupError("unknown claim node");
    const auto b = static_cast<std::size_t>(indptr_[claim]);
    const auto e = static_cast<std::size_t>(indptr_[claim + 1]);
    return {cols_.data() + b, e - b};
}

BipartiteGraph assign_parties(std::span<const int> claim_ph_ids, std::span<const double> amounts,
                              std::span<const int> n_persons, const PartyPoolsConfig& pools,
                              rng::RandomStream& stream) {
    const std::size_t n_claims = claim_ph_ids.size();
    if (amounts.size() != n_claims || n_persons.size() != n_claims) {
        throw ParameterError("assign_parties: column lengths differ");
    }
    const bool use_garage = !pools.excluded.count(PartyKind::garage);
    const bool use_broker = !pools.excluded.count(PartyKind::broker);
    const bool use_expert = !pools.excluded.count(PartyKind::expert);
    const bool use_person = !pools.excluded.count(PartyKind::person);
    if (use_garage && pools.n_garages < 1) throw ConfigError("garage pool must be nonempty");
    if (use_broker && pools.n_brokers < 1) throw ConfigError("broker pool must be nonempty");
    if (use_expert && pools.n_experts < 1) throw ConfigError("expert pool must be nonempty");
    for (std::size_t c = 0; c < n_claims; ++c) {
        if (use_person && n_persons[c] > pools.n_persons) {
            throw ConfigError("claim requires more persons than the pool holds");
        }
    }

    std::vector<Party> parties;
    std::vector<Edge> edges;
    std::unordered_map<std::uint64_t, int> party_index; // (kind, label) -> node
    auto node_of = [&](PartyKind kind, int label) {
        const std::uint64_t key = (static_cast<std::uint64_t>(kind) << 32) | static_cast<std::uint32_t>(label);
        auto it = party_index.find(key);
        if (it != party_index.end()) return it->second;
        const int id = static_cast<int>(parties.size());
        parties.push_back(Party{kind, label});
        party_index.emplace(key, id);
        return id;
    };

    for (std::size_t c = 0; c < n_claims; ++c) {
        const int ci = static_cast<int>(c);
        edges.push_back({ci, node_of(PartyKind::policyholder, claim_ph_ids[c]), 1.0});
        if (use_garage) {
            auto sub = stream.child(rng::Scope::party_garage, c);
            const int label = static_cast<int>(sub.uniform_index(static_cast<std::uint64_t>(pools.n_garages))) + 1;
            edges.push_back({ci, node_of(PartyKind::garage, label), 1.0});
        }
        if (use_broker) {
            auto sub = stream.child(rng::Scope::party_broker, c);
            const int label = static_cast<int>(sub.uniform_index(static_cast<std::uint64_t>(pools.n_brokers))) + 1;
            edges.push_back({ci, node_of(PartyKind::broker, label), 1.0});
        }
        if (use_expert && amounts[c] >= pools.expert_amount_threshold) {
            auto sub = stream.child(rng::Scope::party_expert, c);
            const int label = static_cast<int>(sub.uniform_index(static_cast<std::uint64_t>(pools.n_experts))) + 1;
            edges.push_back({ci, node_of(PartyKind::expert, label), 1.0});
        }
        if (use_person && n_persons[c] > 0) {
            auto sub = stream.child(rng::Scope::party_persons, c);
            // distinct members, rejection sampling against the tiny draw count
            std::vector<int> chosen;
            chosen.reserve(static_cast<std::size_t>(n_persons[c]));
            while (static_cast<int>(chosen.size()) < n_persons[c]) {
                const int label = static_cast<int>(sub.uniform_index(static_cast<std::uint64_t>(pools.n_persons))) + 1;
                if (std::find(chosen.begin(), chosen.end(), label) == chosen.end()) {
                    chosen.push_back(label);
                }
            }
            for (const int label : chosen) {
                edges.push_back({ci, node_of(PartyKind::person, label), 1.0});
            }
        }
    }
    return BipartiteGraph(static_cast<int>(n_claims), std::move(parties), edges);
}

BiRankResult birank(const BipartiteGraph& graph, std::span<const double> query_claims,
                    const BiRankOptions& options) {
    const int n_c = graph.n_claims();
    const int n_p = graph.n_parties();
    if (static_cast<int>(query_claims.size()) != n_c) throw ParameterError("query vector length must equal claim count");
    for (const double q : query_claims) {
        if (!std::isfinite(q)) throw ParameterError("query vector entries must be finite");
    }
    if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) throw ParameterError("birank alpha must be in [0,1]");

    std::vector<double> inv_sqrt_dc(static_cast<std::size_t>(n_c), 0.0);
    std::vector<double> inv_sqrt_dp(static_cast<std::size_t>(n_p), 0.0);
    for (int c = 0; c < n_c; ++c) {
        const int d = graph.claim_degree(c);
        if (d > 0) inv_sqrt_dc[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(static_cast<double>(d));
    }
    for (int p = 0; p < n_p; ++p) {
        const int d = graph.party_degree(p);
        if (d > 0) inv_sqrt_dp[static_cast<std::size_t>(p)] = 1.0 / std::sqrt(static_cast<double>(d));
    }

    // Normalized weights in CSR form, claims-major then parties-major.
    std::vector<std::int64_t> cp_indptr(static_cast<std::size_t>(n_c) + 1, 0);
    std::vector<std::int32_t> cp_cols;
    std::vector<double> cp_vals;
    std::vector<std::int64_t> pc_indptr(static_cast<std::size_t>(n_p) + 1, 0);
    std::vector<std::int32_t> pc_cols;
    std::vector<double> pc_vals;
    cp_cols.reserve(graph.n_edges());
    cp_vals.reserve(graph.n_edges());
    pc_cols.reserve(graph.n_edges());
    pc_vals.reserve(graph.n_edges());
    for (int c = 0; c < n_c; ++c) {
        const auto parties = graph.claim_parties(c);
        for (std::size_t k = 0; k < parties.size(); ++k) {
            const double w = graph.claim_party_weight(c, k) * inv_sqrt_dc[static_cast<std::size_t>(c)] *
                             inv_sqrt_dp[static_cast<std::size_t>(parties[k])];
            cp_cols.push_back(parties[k]);
            cp_vals.push_back(w);
        }
        cp_indptr[static_cast<std::size_t>(c) + 1] = static_cast<std::int64_t>(cp_cols.size());
    }
    for (int p = 0; p < n_p; ++p) {
        const auto claims = graph.party_claims(p);
        for (const std::int32_t c : claims) {
            // unweighted graphs carry weight 1 on both sides
            const double w = inv_sqrt_dc[static_cast<std::size_t>(c)] * inv_sqrt_dp[static_cast<std::size_t>(p)];
            pc_cols.push_back(c);
            pc_vals.push_back(w);
        }
        pc_indptr[static_cast<std::size_t>(p) + 1] = static_cast<std::int64_t>(pc_cols.size());
    }

    const auto& ops = simd::ops();
    BiRankResult result;
    result.claim_scores.assign(static_cast<std::size_t>(n_c), n_c > 0 ? 1.0 / n_c : 0.0);
    result.party_scores.assign(static_cast<std::size_t>(n_p), n_p > 0 ? 1.0 / n_p : 0.0);
    std::vector<double> c_next(static_cast<std::size_t>(n_c));
    std::vector<double> p_next(static_cast<std::size_t>(n_p));

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        ops.spmv_csr(cp_indptr.data(), cp_cols.data(), cp_vals.data(), static_cast<std::size_t>(n_c),
                     result.party_scores.data(), c_next.data());
        ops.axpby(options.alpha, c_next.data(), 1.0 - options.alpha, query_claims.data(), c_next.data(),
                  static_cast<std::size_t>(n_c));
        ops.spmv_csr(pc_indptr.data(), pc_cols.data(), pc_vals.data(), static_cast<std::size_t>(n_p),
                     c_next.data(), p_next.data());

        const double dc = ops.max_abs_diff(c_next.data(), result.claim_scores.data(), static_cast<std::size_t>(n_c));
        const double dp = ops.max_abs_diff(p_next.data(), result.party_scores.data(), static_cast<std::size_t>(n_p));
        result.claim_scores.swap(c_next);
        result.party_scores.swap(p_next);
        result.iterations = iter;
        if (std::max(dc, dp) < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

HomophilyResult homophily_metrics(const ClaimProjection& projection, std::span<const std::uint8_t> fraud) {
    const int n = projection.n_claims();
    if (static_cast<int>(fraud.size()) != n) throw ParameterError("label vector length must equal claim count");

    HomophilyResult r;
    r.n_claims = static_cast<std::size_t>(n);
    for (const std::uint8_t f : fraud) r.n_fraud += (f != 0);

    for (int c = 0; c < n; ++c) {
        for (const std::int32_t d : projection.neighbors(c)) {
            if (d <= c) continue; // each unordered pair once
            const bool fc = fraud[static_cast<std::size_t>(c)] != 0;
            const bool fd = fraud[static_cast<std::size_t>(d)] != 0;
            if (fc && fd) {
                ++r.m11;
            } else if (fc != fd) {
                ++r.m10;
            } else {
                ++r.m00;
            }
        }
    }
    r.projected_edges = r.m11 + r.m10 + r.m00;
    if (n >= 2) {
        r.rho = 2.0 * static_cast<double>(r.projected_edges) /
                (static_cast<double>(n) * (static_cast<double>(n) - 1.0));
    }

    const double nf = static_cast<double>(r.n_fraud);
    const double expected_m11 = nf * (nf - 1.0) * r.rho / 2.0;
    const double expected_m10 = nf * (static_cast<double>(n) - nf) * r.rho;
    if (r.n_fraud >= 2 && expected_m11 > 0.0) {
        r.dyadicity = static_cast<double>(r.m11) / expected_m11;
    }
    if (r.n_fraud >= 1 && r.n_fraud < r.n_claims && expected_m10 > 0.0) {
        r.heterophilicity = static_cast<double>(r.m10) / expected_m10;
    }
    return r;
}

HomophilyResult homophily_metrics(const BipartiteGraph& graph, std::span<const std::uint8_t> fraud) {
    return homophily_metrics(ClaimProjection(graph), fraud);
}

} // namespace engine::network
