#pragma once

#include <cstdint>
#include <random>

namespace levelk {

// Seed mixer used to derive independent streams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t seed_chain(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed ^ splitmix64(v));
}

template <typename... Rest>
inline std::uint64_t seed_chain(std::uint64_t seed, std::uint64_t v, Rest... rest) {
    return seed_chain(seed_chain(seed, v), rest...);
}

// Deterministic random source. Distributions are generated from raw engine
// output rather than <random> distribution objects, so sequences do not
// depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive on both ends
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 eng_;
};

}  // namespace levelk
