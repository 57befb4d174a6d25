#pragma once

// The weighted walk on the percolation backbone, sampled two equivalent ways:
//
//  * kernel sampling: from the current site, step to a forward neighbor with
//    probability proportional to its weight among the neighbors of maximal
//    truncated path length (on leak-free environments this is exactly
//    "weight restricted to backbone neighbors");
//
//  * permutation construction: every site carries a random permutation of
//    its forward neighbors, drawn by successive weighted selection without
//    replacement; the walk with lookahead budget k steps to the first
//    permutation entry among the neighbors maximizing the budget-truncated
//    path length.  Its law converges to the kernel walk as the budget grows
//    and makes regeneration bookkeeping measurable.
//
// A brute-force dynamic program over explicit windows provides the exact
// distribution as a rational-arithmetic oracle for both samplers.

#include <bitset>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "opcwalk/environment.hpp"
#include "opcwalk/hashing.hpp"
#include "opcwalk/rational.hpp"
#include "opcwalk/site.hpp"

namespace opcwalk {

class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WalkPath {
    Site start;
    std::vector<std::array<std::int8_t, kMaxDim>> displacements;  // one per step

    Site site_at(std::size_t j) const {
        Site s = start;
        for (std::size_t t = 0; t < j; ++t) {
            for (int i = 0; i < kMaxDim; ++i)
                s.x[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(
                    s.x[static_cast<std::size_t>(i)] + displacements[t][static_cast<std::size_t>(i)]);
        }
        s.n = start.n + static_cast<std::int64_t>(j);
        return s;
    }
    Site endpoint() const { return site_at(displacements.size()); }
    std::size_t steps() const { return displacements.size(); }
};

struct StepDistribution {
    std::vector<Site> support;  // neighbors carrying positive mass
    std::vector<double> probs;
};

// Transition law at a backbone site; throws ContractViolation off the backbone.
StepDistribution step_distribution(const Site& s, const Environment& env);

// Per-step diagnostics of a sampled walk.
struct WalkStats {
    long long steps = 0;
    long long leak_steps = 0;  // steps whose best neighbor fell short of the horizon
};

WalkPath sample_walk(const Site& start, int steps, const Environment& env, CounterRng& rng,
                     WalkStats* stats = nullptr);

// Same law as sample_walk but stores nothing; returns the final site.
Site walk_endpoint(const Site& start, int steps, const Environment& env, CounterRng& rng,
                   WalkStats* stats = nullptr);

struct PermutationSample {
    Site site;
    std::vector<int> ordering;  // neighbor indices, a bijection on {0..N-1}
};

// One fresh draw from the permutation law at s (first entry has mass
// proportional to its weight, and so on without replacement).
PermutationSample sample_permutation(const Site& s, const Environment& env, CounterRng& rng);

// Site-attached permutations: a pure function of (stream seed, site), so all
// lookahead budgets of one walk handle see consistent orderings.
inline constexpr std::size_t kMaxNeighbors = 96;
using NeighborMask = std::bitset<kMaxNeighbors>;

class PermutationStream {
public:
    explicit PermutationStream(std::uint64_t walk_seed)
        : seed_(derive_seed(walk_seed, SeedTag::permutation)) {}

    // Index of the first permutation entry whose bit is set in `allowed`.
    int first_in(const Environment& env, const Site& s, const NeighborMask& allowed) const;

    // The full ordering at s (test/diagnostic use).
    std::vector<int> ordering(const Environment& env, const Site& s) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

// Truncated-lookahead path of length k from start: step j maximizes the path
// length truncated at budget k-j-1 (the final step is unconstrained) and ties
// resolve by the site permutation.
WalkPath local_path(const Site& start, int k, const Environment& env, const PermutationStream& perms);

// The set of admissible next steps for lookahead budget i (i < 0 means no
// constraint), plus the attained maximum; shared with the regeneration scan.
NeighborMask lookahead_set(const Site& s, int budget, const Environment& env, int* best_out = nullptr);

using ExactDistribution = std::map<Site, Rational, SiteLess>;

// Exact end-site distribution after `steps` steps on an explicit window,
// by dynamic programming with rational weights.  Refuses huge windows.
ExactDistribution exact_walk_distribution(const WindowEnvironment& win, const Site& start, int steps);

// Plug-in total variation between an exact distribution and empirical counts.
double empirical_tv(const ExactDistribution& exact,
                    const std::unordered_map<Site, std::size_t, SiteHasher>& counts, std::size_t n);

}  // namespace opcwalk
