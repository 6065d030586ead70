#pragma once

#include <cstdint>

namespace fogfleet::sim {

// Counter-based generator: every draw is a pure function of the seed and the
// stream coordinates, never of draw order. Compared variants therefore see
// identical randomness per (request, path) — common random numbers.
class counter_rng {
public:
    explicit counter_rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        std::uint64_t h = mix(seed_ ^ 0x8f58'2f6f'7d1a'33b5ull);
        h = mix(h ^ a);
        h = mix(h ^ b);
        h = mix(h ^ c);
        return h;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        return static_cast<double>(bits(a, b, c) >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e37'79b9'7f4a'7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58'476d'1ce4'e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d0'49bb'1331'11ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
};

// Stream tags keep independent draw purposes on disjoint coordinates.
enum class draw : std::uint64_t {
    network = 1,
    compute = 2,
    schedule = 3,
    preemption = 4,
    profile_network = 5,
    profile_compute = 6,
};

}  // namespace fogfleet::sim
