#pragma once

// Space-time lattice sites and the one-step-forward neighborhood.
//
// A site is a point (x, n) with x in Z^d (d <= 4) and n the time coordinate.
// All walks advance n by exactly one per step; the admissible space offsets
// are given by the configured neighborhood:
//   corners          the 2^d vectors with every component +-1
//   shell            the 3^d - 1 nonzero vectors with max-norm 1
//   shell_with_self  the 3^d vectors with max-norm <= 1 (staying put allowed)

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "opcwalk/hashing.hpp"

namespace opcwalk {

inline constexpr int kMaxDim = 4;

struct Site {
    std::array<std::int32_t, kMaxDim> x{};  // unused coordinates stay zero
    std::int64_t n = 0;

    friend bool operator==(const Site&, const Site&) = default;
};

inline Site make_site(std::initializer_list<std::int32_t> coords, std::int64_t n) {
    Site s;
    int i = 0;
    for (std::int32_t c : coords) s.x[static_cast<std::size_t>(i++)] = c;
    s.n = n;
    return s;
}

inline std::uint64_t site_hash(std::uint64_t seed, const Site& s) {
    std::uint64_t h = splitmix64(seed);
    for (int i = 0; i < kMaxDim; ++i)
        h = hash_mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(s.x[static_cast<std::size_t>(i)])));
    return hash_mix(h, static_cast<std::uint64_t>(s.n));
}

struct SiteHasher {
    std::size_t operator()(const Site& s) const {
        return static_cast<std::size_t>(site_hash(0x5173ull, s));
    }
};

// Deterministic ordering (time first, then coordinates) for sorted output.
struct SiteLess {
    bool operator()(const Site& a, const Site& b) const {
        if (a.n != b.n) return a.n < b.n;
        return a.x < b.x;
    }
};

enum class Neighborhood { corners, shell, shell_with_self };

std::string to_string(Neighborhood nb);

struct LatticeConfig {
    int d = 1;
    Neighborhood neighborhood = Neighborhood::corners;
    double p = 1.0;
    int horizon = 50;
};

// Canonical offset table for one lattice configuration, in lexicographic
// order on the offset vector.  Precomputed once; walks index into it.
class NeighborTable {
public:
    NeighborTable() = default;
    explicit NeighborTable(const LatticeConfig& cfg);

    int size() const { return static_cast<int>(offsets_.size()); }
    const std::array<std::int8_t, kMaxDim>& offset(int i) const {
        return offsets_[static_cast<std::size_t>(i)];
    }

    Site apply(const Site& s, int i) const {
        Site t = s;
        const auto& off = offsets_[static_cast<std::size_t>(i)];
        for (int k = 0; k < kMaxDim; ++k)
            t.x[static_cast<std::size_t>(k)] =
                static_cast<std::int32_t>(t.x[static_cast<std::size_t>(k)] + off[static_cast<std::size_t>(k)]);
        t.n = s.n + 1;
        return t;
    }

private:
    std::vector<std::array<std::int8_t, kMaxDim>> offsets_;
};

// The forward neighborhood of s, all at time s.n + 1, canonical order.
std::vector<Site> neighbors(const Site& s, const LatticeConfig& cfg);

void validate_lattice(const LatticeConfig& cfg);  // throws std::invalid_argument

}  // namespace opcwalk
