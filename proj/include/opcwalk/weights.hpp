#pragma once

// Stationary, strictly positive weight fields K of several dependence
// classes.  Each field is a pure function of (seed, site):
//
//   constant      K == c
//   iid           independent uniform on [lo, hi] per site
//   time_markov   one stationary finite-state Markov chain per space column,
//                 independent across columns, sampled exactly via
//                 coupling-from-the-past so any (site, n) can be queried
//                 directly in any order
//   berger        K(x, n) = ((beta(n) + 3|x| + x) mod 3) + 1 with beta(n)
//                 i.i.d. uniform on {0,1,2}; d = 1 only
//   m_dependent   mean of i.i.d. uniforms over the space-time ball of radius
//                 w around the site, plus a positive floor; dependence range
//                 exactly 2w along every axis

#include <cstdint>
#include <string>
#include <vector>

#include "opcwalk/site.hpp"
#include "opcwalk/site_cache.hpp"

namespace opcwalk {

enum class WeightKind { constant, iid, time_markov, berger, m_dependent };

std::string to_string(WeightKind kind);

struct WeightFieldSpec {
    WeightKind kind = WeightKind::constant;

    double constant_value = 1.0;

    double iid_lo = 0.5;
    double iid_hi = 1.5;

    // time_markov: the initial law must be the stationary vector of the
    // transition matrix (checked at validation time).
    std::vector<double> markov_values{1.0, 2.0};
    std::vector<std::vector<double>> markov_transition{{0.8, 0.2}, {0.2, 0.8}};
    std::vector<double> markov_stationary{0.5, 0.5};

    int mdep_radius = 1;
    double mdep_floor = 0.5;
};

// Returns human-readable complaints; empty means the spec is valid for the
// given dimension.  Positivity of every reachable weight is enforced here.
std::vector<std::string> validate_weight_spec(const WeightFieldSpec& spec, int d);

class WeightField {
public:
    WeightField(std::uint64_t seed, const LatticeConfig& cfg, const WeightFieldSpec& spec);

    double at(const Site& s) const;  // thread-safe, deterministic

    const WeightFieldSpec& spec() const { return spec_; }

private:
    double markov_at(const Site& s) const;
    double mdep_at(const Site& s) const;

    std::uint64_t seed_;
    LatticeConfig cfg_;
    WeightFieldSpec spec_;
    mutable SiteCache<double> memo_;  // only populated for the expensive kinds
};

}  // namespace opcwalk
