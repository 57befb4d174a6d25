#include "opcwalk/pairwalk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "opcwalk/hashing.hpp"
#include "opcwalk/parallel.hpp"

namespace opcwalk {

namespace {

// Disjoint index blocks keep every seed stream in this module independent of
// the single-walk experiments and of each other.
constexpr std::uint64_t kJointBlock = 0x1000000000ull;
constexpr std::uint64_t kIndepBlock = 0x2000000000ull;
constexpr std::uint64_t kAnnulusBlock = 0x3000000000ull;

bool is_zero_matrix(const Matrix& u, int d) {
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0.0) return false;
    return true;
}

std::array<std::int32_t, kMaxDim> diff(const std::array<std::int32_t, kMaxDim>& a,
                                       const std::array<std::int32_t, kMaxDim>& b) {
    std::array<std::int32_t, kMaxDim> out{};
    for (int k = 0; k < kMaxDim; ++k)
        out[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
    return out;
}

}  // namespace

WalkPath stream_walk(const Site& start, long long steps, const Environment& env,
                     const PermutationStream& perms, WalkStats* stats) {
    if (steps < 0) throw std::invalid_argument("stream_walk: negative step count");
    const NeighborTable& tab = env.offsets();
    const int h = env.lattice().horizon;
    WalkPath path;
    path.start = start;
    path.displacements.reserve(static_cast<std::size_t>(steps));
    Site s = start;
    for (long long j = 0; j < steps; ++j) {
        int best = -2;
        const NeighborMask allowed = lookahead_set(s, h, env, &best);
        if (stats) {
            ++stats->steps;
            if (best < h) ++stats->leak_steps;
        }
        const int i = perms.first_in(env, s, allowed);
        path.displacements.push_back(tab.offset(i));
        s = tab.apply(s, i);
    }
    return path;
}

PairWalkRecord run_pair(PairMode mode, const Site& x1, const Site& x2, int target, int m,
                        const Environment& env1, const Environment& env2,
                        std::uint64_t walk_seed1, std::uint64_t walk_seed2, const PairOptions& opts) {
    if (target < 1) throw std::invalid_argument("run_pair: target must be positive");
    if (x1.n != 0 || x2.n != 0)
        throw std::invalid_argument("run_pair: both walks start at time zero");
    if (mode == PairMode::joint && &env1 != &env2)
        throw ContractViolation("run_pair: joint mode shares a single environment");
    if (mode == PairMode::independent && &env1 == &env2)
        throw ContractViolation("run_pair: independent mode needs two environments");

    PairWalkRecord rec;
    rec.mode = mode;
    rec.start1 = x1;
    rec.start2 = x2;
    rec.sim_times.push_back(0);
    rec.marks1.push_back(x1.x);
    rec.marks2.push_back(x2.x);

    RegenScanner s1(x1, m, env1, walk_seed1, opts.regen);
    RegenScanner s2(x2, m, env2, walk_seed2, opts.regen);
    long long t1 = 0, t2 = 0;
    Site k1, k2;
    bool ok1 = s1.next(t1, k1);
    if (ok1) rec.times1.push_back(t1);
    bool ok2 = s2.next(t2, k2);
    if (ok2) rec.times2.push_back(t2);
    int found = 0;
    while (ok1 && ok2 && found < target) {
        if (t1 == t2) {
            rec.sim_times.push_back(t1);
            rec.marks1.push_back(k1.x);
            rec.marks2.push_back(k2.x);
            ++found;
            if (found == target) break;
            ok1 = s1.next(t1, k1);
            if (ok1) rec.times1.push_back(t1);
            ok2 = s2.next(t2, k2);
            if (ok2) rec.times2.push_back(t2);
        } else if (t1 < t2) {
            ok1 = s1.next(t1, k1);
            if (ok1) rec.times1.push_back(t1);
        } else {
            ok2 = s2.next(t2, k2);
            if (ok2) rec.times2.push_back(t2);
        }
    }
    rec.complete = found == target;
    rec.steps_scanned = s1.steps_scanned() + s2.steps_scanned();

    for (std::size_t i = 0; i + 1 < rec.sim_times.size(); ++i) {
        XiSummary xi;
        xi.tau_sim = rec.sim_times[i + 1] - rec.sim_times[i];
        xi.y1 = diff(rec.marks1[i + 1], rec.marks1[i]);
        xi.y2 = diff(rec.marks2[i + 1], rec.marks2[i]);
        xi.end_separation = diff(rec.marks1[i + 1], rec.marks2[i + 1]);
        rec.xi_summaries.push_back(xi);
    }

    if (opts.keep_paths) {
        const long long span = rec.sim_times.back();
        PermutationStream p1(walk_seed1), p2(walk_seed2);
        rec.path1 = stream_walk(x1, span, env1, p1);
        rec.path2 = stream_walk(x2, span, env2, p2);
    }
    return rec;
}

XiKey summarize_xi(const XiSummary& xi, int tau_clip) {
    if (tau_clip < 1) throw std::invalid_argument("summarize_xi: clip must be positive");
    XiKey key{};
    key[0] = static_cast<std::int32_t>(std::min<long long>(xi.tau_sim, tau_clip));
    for (int k = 0; k < kMaxDim; ++k) {
        key[static_cast<std::size_t>(1 + k)] = xi.y1[static_cast<std::size_t>(k)];
        key[static_cast<std::size_t>(1 + kMaxDim + k)] = xi.y2[static_cast<std::size_t>(k)];
        key[static_cast<std::size_t>(1 + 2 * kMaxDim + k)] = xi.end_separation[static_cast<std::size_t>(k)];
    }
    return key;
}

double plugin_tv(const std::vector<XiKey>& a, const std::vector<XiKey>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("plugin_tv: empty sample set");
    std::map<XiKey, std::array<double, 2>> hist;
    for (const XiKey& k : a) hist[k][0] += 1.0;
    for (const XiKey& k : b) hist[k][1] += 1.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double tv = 0;
    for (const auto& [key, counts] : hist) tv += std::fabs(counts[0] / na - counts[1] / nb);
    return 0.5 * tv;
}

namespace {

struct FirstIncrement {
    XiKey key{};
    bool ok = false;
};

// One draw of the first simultaneous increment under either law.
FirstIncrement sample_first_increment(PairMode mode, const Site& x1, const Site& x2,
                                      const PairConfig& cfg, std::uint64_t block, std::uint64_t i) {
    FirstIncrement out;
    PairWalkRecord rec;
    if (mode == PairMode::joint) {
        ConditionedEnvironment ce = condition_on_sites(derive_seed(cfg.master_seed, SeedTag::replica, block + i),
                                                       cfg.lattice, cfg.weight_spec, {x1, x2});
        rec = run_pair(PairMode::joint, x1, x2, 1, cfg.m, *ce.env, *ce.env,
                       derive_seed(cfg.master_seed, SeedTag::walk_rng, block + 2 * i),
                       derive_seed(cfg.master_seed, SeedTag::walk_rng, block + 2 * i + 1), cfg.options);
    } else {
        ConditionedEnvironment ce1 = condition_on_sites(
            derive_seed(cfg.master_seed, SeedTag::replica, block + 2 * i), cfg.lattice, cfg.weight_spec, {x1});
        ConditionedEnvironment ce2 = condition_on_sites(
            derive_seed(cfg.master_seed, SeedTag::replica, block + 2 * i + 1), cfg.lattice, cfg.weight_spec, {x2});
        rec = run_pair(PairMode::independent, x1, x2, 1, cfg.m, *ce1.env, *ce2.env,
                       derive_seed(cfg.master_seed, SeedTag::walk_rng, block + 2 * i),
                       derive_seed(cfg.master_seed, SeedTag::walk_rng, block + 2 * i + 1), cfg.options);
    }
    if (rec.complete && !rec.xi_summaries.empty()) {
        out.key = summarize_xi(rec.xi_summaries.front(), cfg.options.tau_clip);
        out.ok = true;
    }
    return out;
}

}  // namespace

TvResult estimate_tv(const Site& x1, const Site& x2, int n_samples, const PairConfig& cfg) {
    if (n_samples < 1000) throw std::invalid_argument("estimate_tv: need at least 1000 samples per law");
    const std::size_t n = static_cast<std::size_t>(n_samples);
    std::vector<FirstIncrement> joint = replica_map<FirstIncrement>(
        n, cfg.threads, [&](std::size_t i) { return sample_first_increment(PairMode::joint, x1, x2, cfg, kJointBlock, i); });
    std::vector<FirstIncrement> indep = replica_map<FirstIncrement>(n, cfg.threads, [&](std::size_t i) {
        return sample_first_increment(PairMode::independent, x1, x2, cfg, kIndepBlock, i);
    });

    TvResult res;
    std::vector<XiKey> ka, kb;
    for (const FirstIncrement& f : joint)
        if (f.ok) ka.push_back(f.key); else ++res.n_dropped;
    for (const FirstIncrement& f : indep)
        if (f.ok) kb.push_back(f.key); else ++res.n_dropped;
    res.n_joint = ka.size();
    res.n_indep = kb.size();
    res.tv = plugin_tv(ka, kb);

    // Bootstrap band: resample both histograms with replacement.
    CounterRng rng(derive_seed(cfg.master_seed, SeedTag::bootstrap, site_hash(1, x1) ^ site_hash(2, x2)));
    std::vector<double> boots;
    boots.reserve(static_cast<std::size_t>(cfg.bootstrap_rounds));
    std::vector<XiKey> ra(ka.size()), rb(kb.size());
    for (int round = 0; round < cfg.bootstrap_rounds; ++round) {
        for (std::size_t i = 0; i < ka.size(); ++i) ra[i] = ka[rng.next_below(ka.size())];
        for (std::size_t i = 0; i < kb.size(); ++i) rb[i] = kb[rng.next_below(kb.size())];
        boots.push_back(plugin_tv(ra, rb));
    }
    if (boots.size() >= 2) {
        double mean = 0;
        for (double b : boots) mean += b;
        mean /= static_cast<double>(boots.size());
        double var = 0;
        for (double b : boots) var += (b - mean) * (b - mean);
        res.ci_halfwidth = 1.96 * std::sqrt(var / (static_cast<double>(boots.size()) - 1));
    }
    return res;
}

double f_d_reference(double r, double r1, double r2, int d) {
    if (d < 2) throw std::invalid_argument("f_d_reference: profile defined for d >= 2");
    if (!(r1 > 0 && r1 < r2)) throw std::invalid_argument("f_d_reference: need 0 < r1 < r2");
    if (!(r >= r1 && r <= r2)) throw std::invalid_argument("f_d_reference: r outside [r1, r2]");
    if (d == 2) return (1.0 / r1 - 1.0 / r) / (1.0 / r1 - 1.0 / r2);
    return std::log(r / r1) / std::log(r2 / r1);
}

double whitened_norm(const Matrix& u, const std::array<std::int32_t, kMaxDim>& v, int d) {
    if (is_zero_matrix(u, d)) {
        double norm = 0;
        for (int i = 0; i < d; ++i) norm = std::max(norm, std::fabs(static_cast<double>(v[static_cast<std::size_t>(i)])));
        return norm;
    }
    double norm = 0;
    for (int i = 0; i < d; ++i) {
        double row = 0;
        for (int j = 0; j < d; ++j)
            row += u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                   static_cast<double>(v[static_cast<std::size_t>(j)]);
        norm = std::max(norm, std::fabs(row));
    }
    return norm;
}

std::array<std::int32_t, kMaxDim> realize_separation(const Matrix& u, double r, int d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("realize_separation: bad dimension");
    if (r < 0) throw std::invalid_argument("realize_separation: negative separation");
    if (r == 0) return {};
    const int cap = d <= 2 ? 128 : 12;
    const int box = std::min(cap, std::max(1, static_cast<int>(std::ceil(2 * r))));
    std::array<std::int32_t, kMaxDim> best{};
    double best_err = std::fabs(whitened_norm(u, best, d) - r);
    long long best_l1 = 0;
    std::array<std::int32_t, kMaxDim> v{};
    // Odometer over the box in lexicographic order; ties on the norm error
    // prefer the shortest offset, then the lexicographically smallest one.
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(-box);
    for (;;) {
        const double err = std::fabs(whitened_norm(u, v, d) - r);
        long long l1 = 0;
        for (int i = 0; i < d; ++i) l1 += std::abs(static_cast<long long>(v[static_cast<std::size_t>(i)]));
        if (err < best_err - 1e-12 || (err < best_err + 1e-12 && l1 < best_l1)) {
            best_err = err;
            best_l1 = l1;
            best = v;
        }
        int i = d - 1;
        while (i >= 0 && v[static_cast<std::size_t>(i)] == box) {
            v[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(-box);
            --i;
        }
        if (i < 0) break;
        ++v[static_cast<std::size_t>(i)];
    }
    return best;
}

Matrix whitening_from_covariance(const Matrix& sigma, int d) {
    Matrix l;
    if (!cholesky(sigma, d, l)) throw std::invalid_argument("whitening_from_covariance: covariance not positive definite");
    // U = L^{-1} satisfies U^T U = (L L^T)^{-1} = sigma^{-1}.
    Matrix u{};
    for (int col = 0; col < d; ++col) {
        Vec e{};
        e[static_cast<std::size_t>(col)] = 1.0;
        for (int i = 0; i < d; ++i) {
            double acc = e[static_cast<std::size_t>(i)];
            for (int k = 0; k < i; ++k)
                acc -= l[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)][static_cast<std::size_t>(col)];
            u[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)] =
                acc / l[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        }
    }
    return u;
}

AnnulusResult annulus_experiment(const AnnulusSpec& spec, double r, int n_samples, const PairConfig& cfg) {
    if (spec.r1 < spec.min_r1)
        throw std::invalid_argument("annulus_experiment: inner radius below the lattice resolution");
    if (!(spec.r1 < spec.r2)) throw std::invalid_argument("annulus_experiment: need r1 < r2");
    if (!(r >= spec.r1 && r <= spec.r2)) throw std::invalid_argument("annulus_experiment: start radius outside the annulus");
    if (n_samples < 1) throw std::invalid_argument("annulus_experiment: need at least one pair");
    const int d = cfg.lattice.d;

    AnnulusResult res;
    res.start_offset = realize_separation(spec.u, r, d);
    res.realized_r = whitened_norm(spec.u, res.start_offset, d);
    res.f_d_value = f_d_reference(res.realized_r, spec.r1, spec.r2, d);

    const Site x1 = Site{};
    Site x2;
    x2.x = res.start_offset;
    x2.n = 0;

    // 0 inward, 1 outward, 2 censored.
    std::vector<int> outcomes = replica_map<int>(static_cast<std::size_t>(n_samples), cfg.threads, [&](std::size_t i) {
        std::array<std::int32_t, kMaxDim> p1 = x1.x, p2 = x2.x;
        double sep = whitened_norm(spec.u, diff(p1, p2), d);
        if (sep <= spec.r1) return 0;  // decided before any step
        if (sep >= spec.r2) return 1;
        ConditionedEnvironment ce1 = condition_on_sites(
            derive_seed(cfg.master_seed, SeedTag::replica, kAnnulusBlock + 2 * i), cfg.lattice, cfg.weight_spec, {x1});
        ConditionedEnvironment ce2 = condition_on_sites(
            derive_seed(cfg.master_seed, SeedTag::replica, kAnnulusBlock + 2 * i + 1), cfg.lattice, cfg.weight_spec, {x2});
        RegenScanner s1(x1, cfg.m, *ce1.env, derive_seed(cfg.master_seed, SeedTag::walk_rng, kAnnulusBlock + 2 * i),
                        cfg.options.regen);
        RegenScanner s2(x2, cfg.m, *ce2.env, derive_seed(cfg.master_seed, SeedTag::walk_rng, kAnnulusBlock + 2 * i + 1),
                        cfg.options.regen);
        long long t1 = 0, t2 = 0;
        Site k1, k2;
        bool ok1 = s1.next(t1, k1), ok2 = s2.next(t2, k2);
        int skeleton = 0;
        while (ok1 && ok2 && skeleton < cfg.max_skeleton) {
            if (t1 == t2) {
                ++skeleton;
                sep = whitened_norm(spec.u, diff(k1.x, k2.x), d);
                if (sep <= spec.r1) return 0;
                if (sep >= spec.r2) return 1;
                ok1 = s1.next(t1, k1);
                ok2 = s2.next(t2, k2);
            } else if (t1 < t2) {
                ok1 = s1.next(t1, k1);
            } else {
                ok2 = s2.next(t2, k2);
            }
        }
        return 2;
    });
    for (int o : outcomes) {
        if (o == 0) ++res.n_inward;
        else if (o == 1) ++res.n_outward;
        else ++res.n_censored;
    }
    const double decided = static_cast<double>(res.n_inward + res.n_outward);
    if (decided > 0) {
        res.p_hat = static_cast<double>(res.n_outward) / decided;
        res.ci_halfwidth = 1.96 * std::sqrt(std::max(res.p_hat * (1 - res.p_hat), 1e-12) / decided);
    } else {
        res.ci_halfwidth = 1.0;  // nothing decided: maximal uncertainty
    }
    return res;
}

}  // namespace opcwalk
