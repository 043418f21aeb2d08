#include "engine/rng.hpp"

#include "engine/errors.hpp"

namespace engine::rng {

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RandomStream::RandomStream(std::uint64_t master_seed) : RandomStream(splitmix64(master_seed ^ 0xA5A5A5A5A5A5A5A5ULL), true) {}

RandomStream::RandomStream(std::uint64_t key, bool) : key_(key) {
    std::uint64_t s = key;
    for (auto& w : state_) {
        s = splitmix64(s);
        w = s;
    }
    // xoshiro must not start from the all-zero state
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
        state_[0] = 0x9E3779B97F4A7C15ULL;
    }
}

RandomStream RandomStream::child(std::uint64_t kind, std::uint64_t index) const {
    std::uint64_t k = key_;
    k = splitmix64(k ^ (0xD1B54A32D192ED03ULL * (kind + 1)));
    k = splitmix64(k ^ (0x8CB92BA72F3D8DD7ULL * (index + 1)));
    return RandomStream(k, true);
}

std::uint64_t RandomStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomStream::uniform() {
    // 53 random bits, shifted into the open interval (0, 1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double RandomStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
    if (n == 0) throw ParameterError("uniform_index: n must be positive");
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

} // namespace engine::rng
