#include "opcwalk/regeneration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace opcwalk {

bool is_S2m(const Site& s, int m, const Environment& env) {
    if (m < 1) throw std::invalid_argument("is_S2m: m must be positive");
    const NeighborTable& tab = env.offsets();
    std::vector<Site> cur{s};
    for (int j = 1; j <= 2 * m; ++j) {
        std::set<Site, SiteLess> next;
        for (const Site& z : cur)
            for (int i = 0; i < tab.size(); ++i) {
                const Site w = tab.apply(z, i);
                if (env.in_backbone(w)) next.insert(w);
            }
        if (next.empty()) return false;
        cur.assign(next.begin(), next.end());
    }
    Site target = s;
    target.n += 2 * m;
    return cur.size() == 1 && cur.front() == target;
}

RegenScanner::RegenScanner(const Site& start, int m, const Environment& env, std::uint64_t walk_seed,
                           const RegenOptions& opts)
    : env_(env), perms_(walk_seed), start_(start), m_(m), opts_(opts), anchor_(start) {
    if (m < 1) throw std::invalid_argument("regeneration scan: m must be positive");
    if (env.lattice().p >= 1.0)
        throw ContractViolation("regeneration scan: the full lattice never regenerates (p = 1)");
    if (!env.in_backbone(start))
        throw ContractViolation("regeneration scan: start site is outside the horizon backbone");
}

bool RegenScanner::next(long long& time, Site& mark) {
    const NeighborTable& tab = env_.offsets();
    const int h = env_.lattice().horizon;
    while (steps_scanned_ < opts_.step_budget) {
        const long long u = scan_at_;
        // Walk the undecided segment: the path from the last certificate
        // onward, under the budgets this particular lookahead u dictates.
        Site e = anchor_;
        for (long long j = frozen_ + 1; j <= u; ++j) {
            const long long b = u - j - 1;  // final step unconstrained
            const int budget = b < 0 ? -1 : static_cast<int>(std::min<long long>(b, h));
            const NeighborMask allowed = lookahead_set(e, budget, env_);
            e = tab.apply(e, perms_.first_in(env_, e, allowed));
        }
        steps_scanned_ += u - frozen_;
        const int len = env_.path_length(e);
        if (len >= h) {
            // Certified: every longer lookahead follows this same prefix.
            anchor_ = e;
            frozen_ = u;
            scan_at_ = u + 1;
            if (is_S2m(e, m_, env_)) {
                time = u + 2 * m_;
                mark = e;
                mark.n = time;
                scan_at_ = time;  // next candidate: T_{n+1} >= T_n + 2m
                return true;
            }
        } else if (opts_.scan == ScanMode::potential_times) {
            // A finite branch of length `len` was discovered dead; shorter
            // extensions keep ending inside it, so jump past it.
            scan_at_ = u + len + 2;
        } else {
            scan_at_ = u + 1;
        }
    }
    return false;
}

RegenerationRecord find_regenerations(const Site& start, int count, int m, const Environment& env,
                                      std::uint64_t walk_seed, const RegenOptions& opts) {
    if (count < 1) throw std::invalid_argument("find_regenerations: count must be positive");
    RegenScanner scanner(start, m, env, walk_seed, opts);
    RegenerationRecord rec;
    rec.m = m;
    rec.horizon = env.lattice().horizon;
    rec.times.push_back(0);
    rec.space_marks.push_back(start.x);
    long long t = 0;
    Site mark;
    while (static_cast<int>(rec.increments()) < count && scanner.next(t, mark)) {
        rec.times.push_back(t);
        rec.space_marks.push_back(mark.x);
    }
    rec.steps_scanned = scanner.steps_scanned();
    rec.complete = static_cast<int>(rec.increments()) == count;
    return rec;
}

namespace {

struct PooledIncrements {
    std::vector<Vec> y;          // displacement per increment, record order
    std::vector<double> tau;     // duration per increment
    std::vector<std::size_t> record_break;  // index where each record begins
};

PooledIncrements pool(const std::vector<RegenerationRecord>& records) {
    PooledIncrements p;
    for (const RegenerationRecord& r : records) {
        p.record_break.push_back(p.y.size());
        for (std::size_t i = 0; i < r.increments(); ++i) {
            Vec v{};
            const auto disp = r.displacement(i);
            for (int k = 0; k < kMaxDim; ++k) v[static_cast<std::size_t>(k)] = disp[static_cast<std::size_t>(k)];
            p.y.push_back(v);
            p.tau.push_back(static_cast<double>(r.tau(i)));
        }
    }
    p.record_break.push_back(p.y.size());
    return p;
}

}  // namespace

DriftEstimate estimate_drift(const std::vector<RegenerationRecord>& records) {
    PooledIncrements p = pool(records);
    const std::size_t n = p.y.size();
    if (n == 0) throw std::invalid_argument("estimate_drift: no completed increments");
    DriftEstimate est;
    est.n_increments = n;
    Vec sum_y{};
    double sum_tau = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < kMaxDim; ++k) sum_y[static_cast<std::size_t>(k)] += p.y[i][static_cast<std::size_t>(k)];
        sum_tau += p.tau[i];
    }
    for (int k = 0; k < kMaxDim; ++k) est.mu_hat[static_cast<std::size_t>(k)] = sum_y[static_cast<std::size_t>(k)] / sum_tau;

    // Batch means on the ratio estimator: contiguous batches respect the
    // (weak) serial dependence between neighbouring increments.
    const int batches = static_cast<int>(std::min<std::size_t>(30, n));
    est.batches = batches;
    if (batches >= 2) {
        for (int k = 0; k < kMaxDim; ++k) {
            double mean = 0, m2 = 0;
            std::vector<double> ratios;
            ratios.reserve(static_cast<std::size_t>(batches));
            for (int b = 0; b < batches; ++b) {
                const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(batches);
                const std::size_t hi = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(batches);
                double ys = 0, ts = 0;
                for (std::size_t i = lo; i < hi; ++i) {
                    ys += p.y[i][static_cast<std::size_t>(k)];
                    ts += p.tau[i];
                }
                ratios.push_back(ts > 0 ? ys / ts : 0.0);
            }
            for (double r : ratios) mean += r;
            mean /= static_cast<double>(batches);
            for (double r : ratios) m2 += (r - mean) * (r - mean);
            est.std_error[static_cast<std::size_t>(k)] =
                std::sqrt(m2 / (static_cast<double>(batches) * (static_cast<double>(batches) - 1)));
        }
    }
    return est;
}

CovarianceEstimate estimate_covariance(const std::vector<RegenerationRecord>& records, int lag_cutoff) {
    if (lag_cutoff < 0) throw std::invalid_argument("estimate_covariance: negative lag cutoff");
    PooledIncrements p = pool(records);
    const std::size_t n = p.y.size();
    if (n < static_cast<std::size_t>(lag_cutoff) + 10)
        throw std::invalid_argument("estimate_covariance: not enough increments for the lag cutoff");
    const int d = kMaxDim;  // displacement vectors are zero-padded beyond the lattice d

    Vec mean{};
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) mean[static_cast<std::size_t>(k)] += p.y[i][static_cast<std::size_t>(k)];
    for (int k = 0; k < d; ++k) mean[static_cast<std::size_t>(k)] /= static_cast<double>(n);

    CovarianceEstimate est;
    est.lag_cutoff = lag_cutoff;
    est.n_increments = n;
    Matrix acc{};
    for (int lag = 0; lag <= lag_cutoff; ++lag) {
        Matrix c{};
        std::size_t pairs = 0;
        for (std::size_t rb = 0; rb + 1 < p.record_break.size(); ++rb) {
            const std::size_t lo = p.record_break[rb], hi = p.record_break[rb + 1];
            if (hi - lo <= static_cast<std::size_t>(lag)) continue;
            for (std::size_t i = lo; i + static_cast<std::size_t>(lag) < hi; ++i) {
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                            (p.y[i][static_cast<std::size_t>(a)] - mean[static_cast<std::size_t>(a)]) *
                            (p.y[i + static_cast<std::size_t>(lag)][static_cast<std::size_t>(b)] -
                             mean[static_cast<std::size_t>(b)]);
                ++pairs;
            }
        }
        if (pairs > 0)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] /= static_cast<double>(pairs);
        est.per_lag_terms.push_back(c);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const double v = c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                if (lag == 0) {
                    acc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += v;
                } else {  // the series adds C_k and its transpose
                    acc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += v;
                    acc[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] += v;
                }
            }
    }
    // Symmetrize (exact up to rounding) and clip negative eigenvalues.
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            const double v = 0.5 * (acc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
                                    acc[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]);
            acc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
            acc[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = v;
        }
    Matrix vecs;
    Vec vals;
    sym_eigen(acc, d, vecs, vals);
    Matrix clipped{};
    for (int k = 0; k < d; ++k) {
        const double lam = std::max(vals[static_cast<std::size_t>(k)], 0.0);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                clipped[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                    lam * vecs[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] *
                    vecs[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
    }
    est.sigma = clipped;
    return est;
}

TailFit fit_tail(const std::vector<long long>& samples) {
    if (samples.size() < 100) throw std::invalid_argument("fit_tail: need at least 100 samples");
    const long long lo = *std::min_element(samples.begin(), samples.end());
    const long long hi = *std::max_element(samples.begin(), samples.end());
    if (lo == hi) throw std::invalid_argument("fit_tail: degenerate (constant) samples");
    // Survival function on the integers, kept where at least 10 samples remain.
    std::vector<long long> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const double floor_p = 10.0 / n;
    std::vector<double> xs, ys;
    std::size_t idx = 0;
    for (long long t = lo; t < hi; ++t) {
        while (idx < sorted.size() && sorted[idx] <= t) ++idx;
        const double surv = (n - static_cast<double>(idx)) / n;
        if (surv < floor_p) break;
        xs.push_back(static_cast<double>(t));
        ys.push_back(std::log(surv));
    }
    if (xs.size() < 2) throw std::invalid_argument("fit_tail: too few usable survival points");
    LogLinearFit fit = loglinear_fit(xs, ys);
    TailFit out;
    out.prefactor = std::exp(fit.intercept);
    out.rate = -fit.slope;
    out.r_squared = fit.r_squared;
    out.points = xs.size();
    return out;
}

}  // namespace opcwalk
