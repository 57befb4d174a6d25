#pragma once

// Statistical backends: least-squares fits, small symmetric-matrix helpers,
// normal-distribution numerics, empirical normality reports, and the central
// limit theorem experiments (annealed and quenched).

#include <array>
#include <cstdint>
#include <vector>

#include "opcwalk/site.hpp"
#include "opcwalk/weights.hpp"

namespace opcwalk {

struct LogLinearFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};

// Ordinary least squares through (x, y); errors on fewer than two points or
// coincident abscissae.  Constant ys fit exactly, so r_squared is 1 there.
LogLinearFit loglinear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Dense d x d matrices for d <= kMaxDim; only the leading block is used.
using Matrix = std::array<std::array<double, kMaxDim>, kMaxDim>;
using Vec = std::array<double, kMaxDim>;

// Cyclic Jacobi eigendecomposition of a symmetric matrix: a = vecs * diag(vals) * vecs^T.
void sym_eigen(const Matrix& a, int d, Matrix& vecs, Vec& vals);

// Cholesky factor a = l * l^T (lower triangular); false if a is not
// numerically positive definite.
bool cholesky(const Matrix& a, int d, Matrix& l);

double normal_cdf(double x);
// Inverse standard normal distribution function (rational initial guess plus
// one Halley refinement; accurate to ~1e-15 on (0, 1)).
double normal_quantile(double p);

// One-sample Kolmogorov-Smirnov distance against the standard normal.
double ks_distance_to_normal(std::vector<double> samples);
// Pearson correlation between sorted samples and standard normal quantiles.
double qq_correlation_to_normal(std::vector<double> samples);

struct NormalityReport {
    std::size_t n = 0;
    double ks_distance = 1;      // max over coordinates, after whitening
    double qq_correlation = -1;  // min over coordinates, after whitening
    double standardized_mean = 0;      // max_j |mean| of the input samples
    double standardized_variance = 0;  // max_j variance of the input samples
};

// Whitens by the sample mean and covariance (Cholesky), then tests each
// coordinate against the standard normal.  Degenerate covariance throws.
NormalityReport normality_report(const std::vector<Vec>& samples, int d);

enum class CltMode { annealed, quenched };

struct CltConfig {
    LatticeConfig lattice;
    WeightFieldSpec weight_spec;
    int m = 1;
    long long steps = 1000;
    int replicas = 1000;
    int environments = 1;  // quenched mode only
    std::uint64_t master_seed = 1;
    int threads = 1;
    long long drift_presteps = 0;  // 0: pick automatically from `steps`
};

struct CltReport {
    CltMode mode = CltMode::annealed;
    std::vector<NormalityReport> per_environment;  // annealed: a single pooled report
    std::vector<Vec> env_means;  // per-environment sample means on the common scale
    std::vector<std::vector<Vec>> env_samples;  // scaled samples, one bucket per environment
    Vec drift_used{};
    Matrix scale_used{};  // pooled sample covariance of the centred, scaled samples
    long long leak_steps = 0;  // walk steps whose best branch fell short of the horizon
};

// Collects (X_steps - steps * mu_hat) / sqrt(steps) over replicas.  Annealed
// mode draws a fresh weight field and percolation per replica; quenched mode
// fixes `environments` weight fields and resamples percolation and walk per
// replica, reporting normality per environment on a pooled scale.
CltReport clt_experiment(CltMode mode, const CltConfig& cfg);

}  // namespace opcwalk
