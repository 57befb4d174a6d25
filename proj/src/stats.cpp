#include "opcwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opcwalk/hashing.hpp"
#include "opcwalk/parallel.hpp"
#include "opcwalk/regeneration.hpp"
#include "opcwalk/walker.hpp"

namespace opcwalk {

LogLinearFit loglinear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("loglinear_fit: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("loglinear_fit: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0) throw std::invalid_argument("loglinear_fit: abscissae are degenerate");
    LogLinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy <= 0) {
        fit.r_squared = 1.0;  // constant ordinates are fit exactly
    } else {
        double ss_res = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

void sym_eigen(const Matrix& a, int d, Matrix& vecs, Vec& vals) {
    // Cyclic Jacobi sweeps; d <= kMaxDim so a handful of sweeps suffices.
    Matrix m = a;
    vecs = Matrix{};
    for (int i = 0; i < d; ++i) vecs[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += std::fabs(m[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]);
        if (off < 1e-15) break;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                const double apq = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                if (std::fabs(apq) < 1e-18) continue;
                const double app = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(p)];
                const double aqq = m[static_cast<std::size_t>(q)][static_cast<std::size_t>(q)];
                const double theta = (aqq - app) / (2 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < d; ++k) {
                    const auto kp = static_cast<std::size_t>(k);
                    const double mkp = m[kp][static_cast<std::size_t>(p)];
                    const double mkq = m[kp][static_cast<std::size_t>(q)];
                    m[kp][static_cast<std::size_t>(p)] = c * mkp - s * mkq;
                    m[kp][static_cast<std::size_t>(q)] = s * mkp + c * mkq;
                }
                for (int k = 0; k < d; ++k) {
                    const auto kp = static_cast<std::size_t>(k);
                    const double mpk = m[static_cast<std::size_t>(p)][kp];
                    const double mqk = m[static_cast<std::size_t>(q)][kp];
                    m[static_cast<std::size_t>(p)][kp] = c * mpk - s * mqk;
                    m[static_cast<std::size_t>(q)][kp] = s * mpk + c * mqk;
                }
                for (int k = 0; k < d; ++k) {
                    const auto kp = static_cast<std::size_t>(k);
                    const double vkp = vecs[kp][static_cast<std::size_t>(p)];
                    const double vkq = vecs[kp][static_cast<std::size_t>(q)];
                    vecs[kp][static_cast<std::size_t>(p)] = c * vkp - s * vkq;
                    vecs[kp][static_cast<std::size_t>(q)] = s * vkp + c * vkq;
                }
            }
    }
    vals = Vec{};
    for (int i = 0; i < d; ++i) vals[static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
}

bool cholesky(const Matrix& a, int d, Matrix& l) {
    l = Matrix{};
    double max_diag = 0;
    for (int i = 0; i < d; ++i) max_diag = std::max(max_diag, std::fabs(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)]));
    const double tol = 1e-12 * std::max(max_diag, 1e-300);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            for (int k = 0; k < j; ++k)
                s -= l[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * l[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            if (i == j) {
                if (s <= tol) return false;
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::sqrt(s);
            } else {
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s / l[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
            }
        }
    }
    return true;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0, 1)");
    // Rational approximation (relative error ~1e-9), then one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double e[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((e[0] * q + e[1]) * q + e[2]) * q + e[3]) * q + 1);
    } else if (p <= 1 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((e[0] * q + e[1]) * q + e[2]) * q + e[3]) * q + 1);
    }
    const double err = normal_cdf(x) - p;
    const double u = err * std::sqrt(2 * 3.14159265358979323846) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

double ks_distance_to_normal(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("ks_distance_to_normal: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double qq_correlation_to_normal(std::vector<double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("qq_correlation_to_normal: need two samples");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i)
        q[i] = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    double ms = 0, mq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ms += samples[i];
        mq += q[i];
    }
    ms /= static_cast<double>(n);
    mq /= static_cast<double>(n);
    double css = 0, cqq = 0, csq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ds = samples[i] - ms, dq = q[i] - mq;
        css += ds * ds;
        cqq += dq * dq;
        csq += ds * dq;
    }
    if (css <= 0 || cqq <= 0) throw std::invalid_argument("qq_correlation_to_normal: degenerate samples");
    return csq / std::sqrt(css * cqq);
}

NormalityReport normality_report(const std::vector<Vec>& samples, int d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("normality_report: bad dimension");
    if (samples.size() < 100) throw std::invalid_argument("normality_report: need at least 100 samples");
    const double n = static_cast<double>(samples.size());
    Vec mean{};
    for (const Vec& s : samples)
        for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += s[static_cast<std::size_t>(j)];
    for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] /= n;
    Matrix cov{};
    for (const Vec& s : samples)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                    (s[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)]) *
                    (s[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)]);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= (n - 1);

    NormalityReport report;
    report.n = samples.size();
    for (int j = 0; j < d; ++j) {
        report.standardized_mean = std::max(report.standardized_mean, std::fabs(mean[static_cast<std::size_t>(j)]));
        report.standardized_variance =
            std::max(report.standardized_variance, cov[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)]);
    }

    Matrix l;
    if (!cholesky(cov, d, l)) throw std::runtime_error("normality_report: degenerate covariance");

    // Whiten: solve l * y = s - mean per sample, then test each coordinate.
    std::vector<std::vector<double>> coords(static_cast<std::size_t>(d));
    for (auto& c : coords) c.reserve(samples.size());
    for (const Vec& s : samples) {
        Vec y{};
        for (int i = 0; i < d; ++i) {
            double acc = s[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)];
            for (int k = 0; k < i; ++k)
                acc -= l[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(i)] = acc / l[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            coords[static_cast<std::size_t>(i)].push_back(y[static_cast<std::size_t>(i)]);
        }
    }
    report.ks_distance = 0;
    report.qq_correlation = 1;
    for (int j = 0; j < d; ++j) {
        report.ks_distance = std::max(report.ks_distance, ks_distance_to_normal(coords[static_cast<std::size_t>(j)]));
        report.qq_correlation =
            std::min(report.qq_correlation, qq_correlation_to_normal(coords[static_cast<std::size_t>(j)]));
    }
    return report;
}

namespace {

// Drift used for centring: the regeneration-ratio estimator when the cluster
// is nontrivial, the plain ergodic average on the full lattice (p = 1), where
// regenerations never occur.
Vec centering_drift(const CltConfig& cfg, long long presteps, long long* leaks) {
    const int d = cfg.lattice.d;
    Vec mu{};
    if (cfg.lattice.p >= 1.0) {
        const int walks = 8;
        const long long per = std::max<long long>(presteps / walks, 1);
        WalkStats stats;
        std::array<long long, kMaxDim> disp{};
        for (int w = 0; w < walks; ++w) {
            EnvironmentHandle env(derive_seed(cfg.master_seed, SeedTag::conditioning, 0x10000u + static_cast<unsigned>(w)),
                                  derive_seed(cfg.master_seed, SeedTag::weight_field, 0x10000u + static_cast<unsigned>(w)),
                                  cfg.lattice, cfg.weight_spec);
            CounterRng rng(derive_seed(cfg.master_seed, SeedTag::walk_rng, 0x20000000ull + static_cast<unsigned>(w)));
            Site end = walk_endpoint(make_site({}, 0), static_cast<int>(per), env, rng, &stats);
            for (int j = 0; j < d; ++j) disp[static_cast<std::size_t>(j)] += end.x[static_cast<std::size_t>(j)];
        }
        if (leaks) *leaks += stats.leak_steps;
        for (int j = 0; j < d; ++j)
            mu[static_cast<std::size_t>(j)] = static_cast<double>(disp[static_cast<std::size_t>(j)]) /
                                              static_cast<double>(per * walks);
        return mu;
    }
    const int records = 8;
    RegenOptions opts;
    opts.step_budget = std::max<long long>(presteps / records, 10000);
    std::vector<RegenerationRecord> recs;
    for (int w = 0; w < records; ++w) {
        ConditionedEnvironment ce =
            condition_on_origin(derive_seed(cfg.master_seed, SeedTag::replica, 0x40000000ull + static_cast<unsigned>(w)),
                                cfg.lattice, cfg.weight_spec);
        recs.push_back(find_regenerations(make_site({}, 0), 1 << 30, cfg.m, *ce.env,
                                          derive_seed(cfg.master_seed, SeedTag::walk_rng, 0x40000000ull + static_cast<unsigned>(w)),
                                          opts));
    }
    DriftEstimate est = estimate_drift(recs);
    return est.mu_hat;
}

}  // namespace

CltReport clt_experiment(CltMode mode, const CltConfig& cfg) {
    validate_lattice(cfg.lattice);
    if (!validate_weight_spec(cfg.weight_spec, cfg.lattice.d).empty())
        throw std::invalid_argument("clt_experiment: invalid weight specification");
    if (cfg.replicas < 100) throw std::invalid_argument("clt_experiment: need at least 100 replicas");
    if (cfg.steps < 1) throw std::invalid_argument("clt_experiment: need at least one step");
    const int envs = mode == CltMode::quenched ? cfg.environments : 1;
    if (mode == CltMode::quenched && envs < 2)
        throw std::invalid_argument("clt_experiment: quenched mode needs at least two environments");

    CltReport report;
    report.mode = mode;
    const int d = cfg.lattice.d;
    const long long presteps =
        cfg.drift_presteps > 0 ? cfg.drift_presteps : std::max<long long>(1000000, 16 * cfg.steps);
    long long leaks = 0;
    const Vec mu = centering_drift(cfg, presteps, &leaks);
    report.drift_used = mu;

    // One sample per replica: fresh percolation and walk randomness; the
    // weight field is fresh per replica (annealed) or fixed per environment.
    struct ReplicaOut {
        Vec sample{};
        long long leaks = 0;
    };
    const double scale = std::sqrt(static_cast<double>(cfg.steps));
    std::vector<std::vector<Vec>> samples(static_cast<std::size_t>(envs));
    for (int e = 0; e < envs; ++e) {
        const std::uint64_t weight_seed =
            mode == CltMode::quenched ? derive_seed(cfg.master_seed, SeedTag::weight_field, static_cast<std::uint64_t>(e))
                                      : 0;
        std::vector<ReplicaOut> outs = replica_map<ReplicaOut>(
            static_cast<std::size_t>(cfg.replicas), cfg.threads, [&](std::size_t r) {
                const std::uint64_t idx =
                    static_cast<std::uint64_t>(e) * static_cast<std::uint64_t>(cfg.replicas) + r;
                ReplicaOut out;
                WalkStats stats;
                const std::uint64_t perc_base = derive_seed(cfg.master_seed, SeedTag::replica, idx);
                ConditionedEnvironment ce =
                    mode == CltMode::quenched
                        ? condition_on_origin_seeded(perc_base, weight_seed, cfg.lattice, cfg.weight_spec)
                        : condition_on_origin(perc_base, cfg.lattice, cfg.weight_spec);
                CounterRng rng(derive_seed(cfg.master_seed, SeedTag::walk_rng, idx));
                Site end = walk_endpoint(make_site({}, 0), static_cast<int>(cfg.steps), *ce.env, rng, &stats);
                for (int j = 0; j < d; ++j)
                    out.sample[static_cast<std::size_t>(j)] =
                        (static_cast<double>(end.x[static_cast<std::size_t>(j)]) -
                         static_cast<double>(cfg.steps) * mu[static_cast<std::size_t>(j)]) /
                        scale;
                out.leaks = stats.leak_steps;
                return out;
            });
        auto& bucket = samples[static_cast<std::size_t>(e)];
        bucket.reserve(outs.size());
        for (const ReplicaOut& o : outs) {
            bucket.push_back(o.sample);
            leaks += o.leaks;
        }
    }
    report.leak_steps = leaks;

    // Pooled second moments fix the common scale for cross-environment
    // comparisons (and are reported as scale_used).
    Vec pooled_mean{};
    double count = 0;
    for (const auto& bucket : samples)
        for (const Vec& s : bucket) {
            for (int j = 0; j < d; ++j) pooled_mean[static_cast<std::size_t>(j)] += s[static_cast<std::size_t>(j)];
            count += 1;
        }
    for (int j = 0; j < d; ++j) pooled_mean[static_cast<std::size_t>(j)] /= count;
    Matrix pooled_cov{};
    for (const auto& bucket : samples)
        for (const Vec& s : bucket)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    pooled_cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                        (s[static_cast<std::size_t>(i)] - pooled_mean[static_cast<std::size_t>(i)]) *
                        (s[static_cast<std::size_t>(j)] - pooled_mean[static_cast<std::size_t>(j)]);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            pooled_cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= (count - 1);
    report.scale_used = pooled_cov;

    for (int e = 0; e < envs; ++e) {
        std::vector<Vec>& bucket = samples[static_cast<std::size_t>(e)];
        if (mode == CltMode::quenched) {
            // Divide by the pooled per-coordinate spread so environment means
            // are comparable on a unit scale.
            for (Vec& s : bucket)
                for (int j = 0; j < d; ++j) {
                    const double sd =
                        std::sqrt(pooled_cov[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)]);
                    if (sd > 0) s[static_cast<std::size_t>(j)] /= sd;
                }
        }
        Vec env_mean{};
        for (const Vec& s : bucket)
            for (int j = 0; j < d; ++j) env_mean[static_cast<std::size_t>(j)] += s[static_cast<std::size_t>(j)];
        for (int j = 0; j < d; ++j) env_mean[static_cast<std::size_t>(j)] /= static_cast<double>(bucket.size());
        report.env_means.push_back(env_mean);
        report.per_environment.push_back(normality_report(bucket, d));
    }
    report.env_samples = std::move(samples);
    return report;
}

}  // namespace opcwalk
