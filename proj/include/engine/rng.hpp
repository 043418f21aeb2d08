#pragma once

#include <array>
#include <cstdint>

namespace engine::rng {

// Entity kinds used to derive per-entity substreams. The numeric values are
// part of the reproducibility contract: changing them changes every dataset.
enum class Scope : std::uint64_t {
    portfolio_age = 1,
    portfolio_age_range = 2,
    portfolio_gender = 3,
    portfolio_exposure = 4,
    portfolio_exposure_redraw = 5,
    portfolio_ncontracts = 6,
    contract = 16,
    contract_exposure = 17,
    contract_agecar = 18,
    contract_origvalue = 19,
    contract_coverage = 20,
    contract_fuel = 21,
    contract_bonus_malus = 22,
    claim_count = 32,
    claim_amount = 33,
    claim_floor = 34,
    claim_age = 35,
    claim_date = 36,
    claim_police = 37,
    claim_npersons = 38,
    party_garage = 48,
    party_broker = 49,
    party_expert = 50,
    party_persons = 51,
    label_uniform = 64,
    label_subset = 65,
    expert_draw = 80,
    couple = 96,
    generic = 112,
};

// Hierarchically keyed pseudo-random stream. A stream is identified by a
// 64-bit key derived from the master seed and the (kind, index) path of
// child() calls, so two streams with the same path produce the same draws
// regardless of the order in which sibling streams are consumed. The
// generator is xoshiro256++ seeded through splitmix64.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t master_seed);

    RandomStream child(std::uint64_t kind, std::uint64_t index) const;
    RandomStream child(Scope kind, std::uint64_t index) const {
        return child(static_cast<std::uint64_t>(kind), index);
    }

    std::uint64_t next_u64();

    // Uniform draw on the open interval (0, 1); safe to feed to quantile
    // transforms that are singular at the endpoints.
    double uniform();

    // Uniform on (lo, hi).
    double uniform(double lo, double hi);

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    std::uint64_t key() const { return key_; }

private:
    RandomStream(std::uint64_t key, bool);

    std::uint64_t key_;
    std::array<std::uint64_t, 4> state_;
};

} // namespace engine::rng
