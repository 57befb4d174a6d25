#include "opcwalk/environment.hpp"

#include <stdexcept>
#include <string>

#include "opcwalk/hashing.hpp"

namespace opcwalk {

Environment::Environment(const LatticeConfig& cfg) : cfg_(cfg), table_(cfg) {
    validate_lattice(cfg);
}

std::size_t Environment::cache_entries() const { return memo_.entries(); }

int Environment::path_length_budget(const Site& s, int budget) const {
    if (budget < 0) throw std::invalid_argument("path_length budget must be >= 0");
    if (budget > cfg_.horizon) budget = cfg_.horizon;
    return dfs(s, budget);
}

// Depth-first evaluation of min(l(s), budget) with certificate-based early
// exit: as soon as one branch reaches the budget the result is known.  Cache
// entries are either exact clipped lengths or lower bounds (the early exits);
// a lower bound >= budget settles a budgeted query without recursion.
int Environment::dfs(const Site& s, int budget) const {
    if (all_open_) return budget;

    Entry e;
    bool cached = memo_.lookup(s, e);
    if (cached) {
        if (e.exact) return e.value < budget ? e.value : budget;
        if (e.value >= budget) return budget;
        if (e.value < 0) return -1;  // closed is exact by construction
    }

    if (!site_open(s)) {
        memo_.store(s, Entry{-1, true});
        return -1;
    }
    if (budget == 0) return 0;

    int best = 0;
    const int deg = table_.size();
    for (int i = 0; i < deg; ++i) {
        int v = dfs(table_.apply(s, i), budget - 1);
        if (v + 1 > best) best = v + 1;
        if (best == budget) break;
    }

    // best < budget means every branch was exhausted, so best is the true
    // l(s) (and equals min(l, horizon) a fortiori).  best == budget is only a
    // certificate l(s) >= budget, unless the budget already was the horizon.
    bool exact = best < budget || budget == cfg_.horizon;
    memo_.update(s, [&](Entry& slot, bool present) {
        if (present && slot.exact) return;          // never downgrade
        if (present && !exact && slot.value >= best) return;  // keep larger bound
        slot = Entry{static_cast<std::int16_t>(best), exact};
    });
    return best;
}

EnvironmentHandle::EnvironmentHandle(std::uint64_t perc_seed, std::uint64_t weight_seed,
                                     const LatticeConfig& cfg, const WeightFieldSpec& spec)
    : Environment(cfg),
      perc_seed_(perc_seed),
      weight_seed_(weight_seed),
      spec_(spec),
      field_(std::make_unique<WeightField>(weight_seed, cfg, spec)) {
    all_open_ = cfg.p >= 1.0;
}

bool EnvironmentHandle::site_open(const Site& s) const {
    if (lattice().p >= 1.0) return true;
    std::uint64_t h = site_hash(derive_seed(perc_seed_, SeedTag::percolation), s);
    return u01(h) < lattice().p;
}

double EnvironmentHandle::site_weight(const Site& s) const { return field_->at(s); }

WindowEnvironment::WindowEnvironment(const LatticeConfig& cfg) : Environment(cfg) {}

void WindowEnvironment::set_open(const Site& s, Rational weight) {
    if (weight.value() <= 0.0) throw std::invalid_argument("window weights must be positive");
    weights_[s] = weight;
}

void WindowEnvironment::open_box(std::int64_t n0, std::int64_t n1, std::int32_t x_lo, std::int32_t x_hi) {
    if (lattice().d != 1) throw std::invalid_argument("open_box is a 1-d convenience");
    for (std::int64_t n = n0; n <= n1; ++n)
        for (std::int32_t x = x_lo; x <= x_hi; ++x) set_open(make_site({x}, n));
}

bool WindowEnvironment::site_open(const Site& s) const { return weights_.count(s) > 0; }

double WindowEnvironment::site_weight(const Site& s) const {
    auto it = weights_.find(s);
    return it == weights_.end() ? 1.0 : it->second.value();
}

Rational WindowEnvironment::rational_weight(const Site& s) const {
    auto it = weights_.find(s);
    return it == weights_.end() ? Rational(1) : it->second;
}

ConditionedEnvironment condition_on_sites_seeded(std::uint64_t perc_base_seed, std::uint64_t weight_seed,
                                                 const LatticeConfig& cfg, const WeightFieldSpec& spec,
                                                 const std::vector<Site>& anchors, int rejection_cap) {
    for (int i = 0; i <= rejection_cap; ++i) {
        std::uint64_t perc_seed =
            derive_seed(perc_base_seed, SeedTag::conditioning, static_cast<std::uint64_t>(i));
        auto env = std::make_unique<EnvironmentHandle>(perc_seed, weight_seed, cfg, spec);
        bool ok = true;
        for (const Site& a : anchors) {
            if (!env->in_backbone(a)) { ok = false; break; }
        }
        if (ok) return ConditionedEnvironment{std::move(env), i};
    }
    throw std::runtime_error(
        "conditioning failed after " + std::to_string(rejection_cap) +
        " rejections; p is likely subcritical or the horizon too demanding");
}

ConditionedEnvironment condition_on_sites(std::uint64_t base_seed, const LatticeConfig& cfg,
                                          const WeightFieldSpec& spec, const std::vector<Site>& anchors,
                                          int rejection_cap) {
    return condition_on_sites_seeded(base_seed, derive_seed(base_seed, SeedTag::weight_field), cfg, spec,
                                     anchors, rejection_cap);
}

ConditionedEnvironment condition_on_origin_seeded(std::uint64_t perc_base_seed, std::uint64_t weight_seed,
                                                  const LatticeConfig& cfg, const WeightFieldSpec& spec,
                                                  int rejection_cap) {
    return condition_on_sites_seeded(perc_base_seed, weight_seed, cfg, spec, {Site{}}, rejection_cap);
}

ConditionedEnvironment condition_on_origin(std::uint64_t base_seed, const LatticeConfig& cfg,
                                           const WeightFieldSpec& spec, int rejection_cap) {
    return condition_on_sites(base_seed, cfg, spec, {Site{}}, rejection_cap);
}

}  // namespace opcwalk
