#pragma once

// Counter-based pseudorandomness: every random quantity in the simulator is a
// pure function of (seed, coordinates, draw index).  Nothing is materialized,
// so lattices are unbounded, replays are exact, and any query order yields the
// same field.

#include <cstdint>
#include <initializer_list>

namespace opcwalk {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Finalizer with full avalanche; the standard 64-bit mix constants.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Fold one word into a running hash state.
inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t w) {
    return splitmix64(h ^ splitmix64(w + kGolden));
}

inline std::uint64_t hash_words(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t w : words) h = hash_mix(h, w);
    return h;
}

// Uniform double in [0, 1) from a hash value (53 mantissa bits).
inline double u01(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Unbiased-enough uniform in {0, .., n-1} (fixed-point multiply; bias < 2^-64).
inline std::uint64_t bounded(std::uint64_t h, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * n) >> 64);
}

// Disjoint seed streams.  Every subsystem derives its own stream from the
// master seed and a fixed tag, so adding replicas or reordering queries never
// perturbs another stream.
enum class SeedTag : std::uint64_t {
    percolation = 0x01,
    weight_iid = 0x02,
    weight_berger = 0x03,
    weight_markov = 0x04,
    weight_mdep = 0x05,
    permutation = 0x06,
    walk_rng = 0x07,
    conditioning = 0x08,
    replica = 0x09,
    mixing = 0x0A,
    bootstrap = 0x0B,
    weight_field = 0x0C,
};

inline std::uint64_t derive_seed(std::uint64_t master, SeedTag tag, std::uint64_t index = 0) {
    return hash_words(master, {static_cast<std::uint64_t>(tag), index});
}

// Sequential generator built on the same mixer: a keyed counter.  Cheap to
// fork (one per replica) and reproducible independent of thread scheduling.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(splitmix64(key)) {}

    std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(++counter_)); }
    double next_u01() { return u01(next_u64()); }
    // integer in {0, .., n-1}
    std::uint64_t next_below(std::uint64_t n) { return bounded(next_u64(), n); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace opcwalk
