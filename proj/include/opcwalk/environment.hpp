#pragma once

// The random environment: an oriented site percolation field composed with a
// positive weight field.
//
// Sites are open independently with probability p.  l(s) is the length of the
// longest open directed path starting at s (-1 if s is closed, 0 if s is open
// but no neighbor continues).  Infinite-path membership is undecidable, so
// the backbone C = {s : some open path from s is infinite} is approximated by
// the horizon set  C_h = {s : l(s) >= h};  the misclassification probability
// decays exponentially in h.  path_length() returns min(l(s), h).
//
// Everything is a pure function of the seeds, so a handle may be queried from
// many threads in any order; the memo cache only short-circuits recomputation.

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "opcwalk/rational.hpp"
#include "opcwalk/site.hpp"
#include "opcwalk/site_cache.hpp"
#include "opcwalk/weights.hpp"

namespace opcwalk {

class Environment {
public:
    explicit Environment(const LatticeConfig& cfg);
    virtual ~Environment() = default;

    const LatticeConfig& lattice() const { return cfg_; }
    const NeighborTable& offsets() const { return table_; }

    // Raw fields (no backbone restriction).
    virtual bool site_open(const Site& s) const = 0;
    virtual double site_weight(const Site& s) const = 0;

    // min(l(s), horizon); -1 at closed sites.
    int path_length(const Site& s) const { return path_length_budget(s, cfg_.horizon); }

    // min(l(s), budget) for 0 <= budget <= horizon.  Budgeted queries let the
    // truncated-lookahead walk construction ask exactly what it needs.
    int path_length_budget(const Site& s, int budget) const;

    bool in_backbone(const Site& s) const { return path_length(s) >= cfg_.horizon; }

    // Weight on the backbone, zero off it.
    double xi_value(const Site& s) const { return in_backbone(s) ? site_weight(s) : 0.0; }

    // Cache statistics (diagnostics only).
    std::size_t cache_entries() const;

protected:
    bool all_open_ = false;  // degenerate p = 1: every path length equals the budget

private:
    struct Entry {
        std::int16_t value = 0;
        bool exact = false;  // true: value == min(l, horizon); false: l >= value
    };

    int dfs(const Site& s, int budget) const;

    LatticeConfig cfg_;
    NeighborTable table_;
    mutable SiteCache<Entry> memo_;
};

// Environment generated on the fly from seeds (the production handle).
class EnvironmentHandle : public Environment {
public:
    EnvironmentHandle(std::uint64_t perc_seed, std::uint64_t weight_seed,
                      const LatticeConfig& cfg, const WeightFieldSpec& spec);

    bool site_open(const Site& s) const override;
    double site_weight(const Site& s) const override;

    std::uint64_t perc_seed() const { return perc_seed_; }
    std::uint64_t weight_seed() const { return weight_seed_; }
    const WeightFieldSpec& weight_spec() const { return spec_; }

private:
    std::uint64_t perc_seed_;
    std::uint64_t weight_seed_;
    WeightFieldSpec spec_;
    std::unique_ptr<WeightField> field_;
};

// Hand-built finite environment for oracle tests: listed sites are open,
// everything else is closed; weights default to 1 and may be exact rationals.
class WindowEnvironment : public Environment {
public:
    explicit WindowEnvironment(const LatticeConfig& cfg);

    void set_open(const Site& s, Rational weight = Rational(1));
    void open_box(std::int64_t n0, std::int64_t n1, std::int32_t x_lo, std::int32_t x_hi);

    bool site_open(const Site& s) const override;
    double site_weight(const Site& s) const override;
    Rational rational_weight(const Site& s) const;

    std::size_t open_count() const { return weights_.size(); }

private:
    std::unordered_map<Site, Rational, SiteHasher> weights_;
};

// Rejection-sample percolation seeds until the origin (or every site in
// `anchors`) lies in the horizon backbone.  Models conditioning on the event
// that the starting points belong to the infinite cluster.
struct ConditionedEnvironment {
    std::unique_ptr<EnvironmentHandle> env;
    int rejections = 0;  // candidates discarded before acceptance
};

ConditionedEnvironment condition_on_origin(std::uint64_t base_seed, const LatticeConfig& cfg,
                                           const WeightFieldSpec& spec, int rejection_cap = 100000);

ConditionedEnvironment condition_on_sites(std::uint64_t base_seed, const LatticeConfig& cfg,
                                          const WeightFieldSpec& spec, const std::vector<Site>& anchors,
                                          int rejection_cap = 100000);

// Variants with the weight seed held fixed while percolation candidates are
// rejected: a quenched weight field sampled against fresh clusters.
ConditionedEnvironment condition_on_origin_seeded(std::uint64_t perc_base_seed, std::uint64_t weight_seed,
                                                  const LatticeConfig& cfg, const WeightFieldSpec& spec,
                                                  int rejection_cap = 100000);

ConditionedEnvironment condition_on_sites_seeded(std::uint64_t perc_base_seed, std::uint64_t weight_seed,
                                                 const LatticeConfig& cfg, const WeightFieldSpec& spec,
                                                 const std::vector<Site>& anchors, int rejection_cap = 100000);

}  // namespace opcwalk
