#include "opcwalk/walker.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace opcwalk {

namespace {

// Index sampled proportionally to weights[i] over the set bits of `mask`.
// Exactly one rng draw regardless of the mask, so replay is positional.
int weighted_pick(const NeighborMask& mask, const std::vector<double>& weights, CounterRng& rng) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (mask[i]) total += weights[i];
    const double target = rng.next_u01() * total;
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!mask[i]) continue;
        last = static_cast<int>(i);
        acc += weights[i];
        if (target < acc) return last;
    }
    return last;  // rounding pushed the target past the final partial sum
}

std::vector<double> neighbor_weights(const Site& s, const Environment& env) {
    const NeighborTable& tab = env.offsets();
    std::vector<double> w(static_cast<std::size_t>(tab.size()));
    for (int i = 0; i < tab.size(); ++i) w[static_cast<std::size_t>(i)] = env.site_weight(tab.apply(s, i));
    return w;
}

// One kernel step: weight-proportional choice among the neighbors of maximal
// truncated path length.  Returns the chosen neighbor index.
int step_once(const Site& s, const Environment& env, CounterRng& rng, WalkStats* stats) {
    int best = -2;
    const NeighborMask mask = lookahead_set(s, env.lattice().horizon, env, &best);
    if (stats) {
        ++stats->steps;
        if (best < env.lattice().horizon) ++stats->leak_steps;
    }
    return weighted_pick(mask, neighbor_weights(s, env), rng);
}

// Successive weighted selection without replacement; calls visit(index) after
// each pick and stops early when it returns true.  The draw sequence depends
// only on the rng state and the weights, never on the visitor.
void weighted_ordering(std::vector<double> weights, CounterRng& rng,
                       const std::function<bool(int)>& visit) {
    double total = 0.0;
    for (double w : weights) {
        if (w <= 0.0) throw std::invalid_argument("permutation weights must be positive");
        total += w;
    }
    std::size_t remaining = weights.size();
    while (remaining > 0) {
        int pick = -1;
        if (remaining == 1) {
            for (std::size_t i = 0; i < weights.size(); ++i)
                if (weights[i] > 0.0) pick = static_cast<int>(i);
        } else {
            const double target = rng.next_u01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < weights.size(); ++i) {
                if (weights[i] <= 0.0) continue;
                pick = static_cast<int>(i);
                acc += weights[i];
                if (target < acc) break;
            }
        }
        total -= weights[static_cast<std::size_t>(pick)];
        weights[static_cast<std::size_t>(pick)] = 0.0;
        --remaining;
        if (visit(pick)) return;
    }
}

}  // namespace

NeighborMask lookahead_set(const Site& s, int budget, const Environment& env, int* best_out) {
    const NeighborTable& tab = env.offsets();
    NeighborMask mask;
    if (budget < 0) {  // no lookahead constraint: every forward neighbor
        for (int i = 0; i < tab.size(); ++i) mask.set(static_cast<std::size_t>(i));
        if (best_out) *best_out = -2;
        return mask;
    }
    int best = std::numeric_limits<int>::min();
    for (int i = 0; i < tab.size(); ++i) {
        const int v = env.path_length_budget(tab.apply(s, i), budget);
        if (v > best) {
            best = v;
            mask.reset();
        }
        if (v == best) mask.set(static_cast<std::size_t>(i));
    }
    if (best_out) *best_out = best;
    return mask;
}

StepDistribution step_distribution(const Site& s, const Environment& env) {
    if (!env.in_backbone(s)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "step_distribution: site (t=%lld) is outside the horizon backbone",
                      static_cast<long long>(s.n));
        throw ContractViolation(buf);
    }
    const NeighborTable& tab = env.offsets();
    const NeighborMask mask = lookahead_set(s, env.lattice().horizon, env);
    const std::vector<double> w = neighbor_weights(s, env);
    StepDistribution dist;
    double total = 0.0;
    for (int i = 0; i < tab.size(); ++i)
        if (mask[static_cast<std::size_t>(i)]) total += w[static_cast<std::size_t>(i)];
    for (int i = 0; i < tab.size(); ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        dist.support.push_back(tab.apply(s, i));
        dist.probs.push_back(w[static_cast<std::size_t>(i)] / total);
    }
    return dist;
}

WalkPath sample_walk(const Site& start, int steps, const Environment& env, CounterRng& rng,
                     WalkStats* stats) {
    if (steps < 0) throw std::invalid_argument("sample_walk: negative step count");
    WalkPath path;
    path.start = start;
    path.displacements.reserve(static_cast<std::size_t>(steps));
    Site s = start;
    const NeighborTable& tab = env.offsets();
    for (int t = 0; t < steps; ++t) {
        const int i = step_once(s, env, rng, stats);
        path.displacements.push_back(tab.offset(i));
        s = tab.apply(s, i);
    }
    return path;
}

Site walk_endpoint(const Site& start, int steps, const Environment& env, CounterRng& rng,
                   WalkStats* stats) {
    if (steps < 0) throw std::invalid_argument("walk_endpoint: negative step count");
    Site s = start;
    const NeighborTable& tab = env.offsets();
    for (int t = 0; t < steps; ++t) s = tab.apply(s, step_once(s, env, rng, stats));
    return s;
}

PermutationSample sample_permutation(const Site& s, const Environment& env, CounterRng& rng) {
    PermutationSample sample;
    sample.site = s;
    sample.ordering.reserve(static_cast<std::size_t>(env.offsets().size()));
    weighted_ordering(neighbor_weights(s, env), rng, [&](int i) {
        sample.ordering.push_back(i);
        return false;
    });
    return sample;
}

int PermutationStream::first_in(const Environment& env, const Site& s, const NeighborMask& allowed) const {
    if (allowed.none()) throw std::invalid_argument("first_in: empty neighbor set");
    CounterRng rng(site_hash(seed_, s));
    int found = -1;
    weighted_ordering(neighbor_weights(s, env), rng, [&](int i) {
        if (!allowed[static_cast<std::size_t>(i)]) return false;
        found = i;
        return true;
    });
    return found;
}

std::vector<int> PermutationStream::ordering(const Environment& env, const Site& s) const {
    CounterRng rng(site_hash(seed_, s));
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(env.offsets().size()));
    weighted_ordering(neighbor_weights(s, env), rng, [&](int i) {
        order.push_back(i);
        return false;
    });
    return order;
}

WalkPath local_path(const Site& start, int k, const Environment& env, const PermutationStream& perms) {
    if (k < 0) throw std::invalid_argument("local_path: negative length");
    WalkPath path;
    path.start = start;
    path.displacements.reserve(static_cast<std::size_t>(k));
    Site s = start;
    const NeighborTable& tab = env.offsets();
    for (int j = 1; j <= k; ++j) {
        // Remaining-step lookahead; the final step is unconstrained.
        const int budget = k - j - 1;
        const NeighborMask allowed = lookahead_set(s, budget, env);
        const int i = perms.first_in(env, s, allowed);
        path.displacements.push_back(tab.offset(i));
        s = tab.apply(s, i);
    }
    return path;
}

ExactDistribution exact_walk_distribution(const WindowEnvironment& win, const Site& start, int steps) {
    if (steps < 0) throw std::invalid_argument("exact_walk_distribution: negative step count");
    constexpr std::size_t kMaxStates = 1000000;
    const NeighborTable& tab = win.offsets();
    ExactDistribution cur;
    cur[start] = Rational(1);
    for (int t = 0; t < steps; ++t) {
        ExactDistribution next;
        for (const auto& [s, mass] : cur) {
            const NeighborMask mask = lookahead_set(s, win.lattice().horizon, win);
            Rational total(0);
            for (int i = 0; i < tab.size(); ++i)
                if (mask[static_cast<std::size_t>(i)]) total = total + win.rational_weight(tab.apply(s, i));
            for (int i = 0; i < tab.size(); ++i) {
                if (!mask[static_cast<std::size_t>(i)]) continue;
                const Site z = tab.apply(s, i);
                const Rational p = mass * (win.rational_weight(z) / total);
                auto [it, inserted] = next.try_emplace(z, p);
                if (!inserted) it->second = it->second + p;
            }
            if (next.size() > kMaxStates) throw std::runtime_error("exact_walk_distribution: state space too large");
        }
        cur = std::move(next);
    }
    return cur;
}

double empirical_tv(const ExactDistribution& exact,
                    const std::unordered_map<Site, std::size_t, SiteHasher>& counts, std::size_t n) {
    if (n == 0) throw std::invalid_argument("empirical_tv: no samples");
    double sum = 0.0;
    std::size_t matched = 0;
    for (const auto& [s, p] : exact) {
        auto it = counts.find(s);
        const double q = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
        if (it != counts.end()) matched += it->second;
        sum += std::fabs(p.value() - q);
    }
    // Empirical mass that fell outside the exact support.
    sum += static_cast<double>(n - matched) / static_cast<double>(n);
    return 0.5 * sum;
}

}  // namespace opcwalk
