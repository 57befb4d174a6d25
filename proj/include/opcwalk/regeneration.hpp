#pragma once

// Regeneration structure of the backbone walk.  The truncated-lookahead path
// gamma_u is advanced until its endpoint is certified inside the horizon
// backbone and inside S_2m (every backbone path returns to the same space
// coordinate after 2m steps); the walk time u + 2m is then a regeneration
// time: the past and the future of the walk decouple there.
//
// The scan only re-derives the path segment beyond the last certified
// endpoint: lookahead extensions agree on certified prefixes, so the segment
// between certificates is the only part whose shape still depends on u.

#include <array>
#include <cstdint>
#include <vector>

#include "opcwalk/environment.hpp"
#include "opcwalk/stats.hpp"
#include "opcwalk/walker.hpp"

namespace opcwalk {

// True iff every backbone path from s returns to the space coordinate of s
// after exactly 2m steps (reachable-set computation; requires in_backbone(s)).
bool is_S2m(const Site& s, int m, const Environment& env);

enum class ScanMode {
    potential_times,  // jump by l+2 past discovered finite branches
    every_step,       // check the defining infimum at every time (reference)
};

struct RegenOptions {
    ScanMode scan = ScanMode::potential_times;
    long long step_budget = 10000000;  // local-construction steps before giving up
};

struct RegenerationRecord {
    int m = 1;
    int horizon = 0;  // certificates use the horizon backbone; kept for audit
    std::vector<long long> times;  // T_0 = 0 < T_1 < ...
    std::vector<std::array<std::int32_t, kMaxDim>> space_marks;  // X at each T_n
    bool complete = true;  // false: the step budget ran out before `count`
    long long steps_scanned = 0;

    std::size_t increments() const { return times.empty() ? 0 : times.size() - 1; }
    long long tau(std::size_t i) const { return times[i + 1] - times[i]; }
    std::array<std::int32_t, kMaxDim> displacement(std::size_t i) const {
        std::array<std::int32_t, kMaxDim> y{};
        for (int k = 0; k < kMaxDim; ++k)
            y[static_cast<std::size_t>(k)] = space_marks[i + 1][static_cast<std::size_t>(k)] -
                                             space_marks[i][static_cast<std::size_t>(k)];
        return y;
    }
};

// Streaming regeneration scanner (the pair-walk machinery consumes
// regenerations one at a time).
class RegenScanner {
public:
    RegenScanner(const Site& start, int m, const Environment& env, std::uint64_t walk_seed,
                 const RegenOptions& opts = {});

    // Advances to the next regeneration; false once the step budget is spent.
    // On success `time` is T_n and `mark` the certified walk site (X_{T_n}, T_n).
    bool next(long long& time, Site& mark);

    long long steps_scanned() const { return steps_scanned_; }
    const Site& start() const { return start_; }

private:
    const Environment& env_;
    PermutationStream perms_;
    Site start_;
    int m_;
    RegenOptions opts_;
    Site anchor_;            // last certified endpoint e_f
    long long frozen_ = 0;   // its time f
    long long scan_at_ = 0;  // next candidate time u to check
    long long steps_scanned_ = 0;
};

// Runs the scanner until `count` regenerations (or the step budget) and
// packages times and space marks.
RegenerationRecord find_regenerations(const Site& start, int count, int m, const Environment& env,
                                      std::uint64_t walk_seed, const RegenOptions& opts = {});

struct DriftEstimate {
    Vec mu_hat{};
    Vec std_error{};
    std::size_t n_increments = 0;
    int batches = 0;
};

// mu_hat = mean(Y) / mean(tau) pooled over records; errors by batch means.
DriftEstimate estimate_drift(const std::vector<RegenerationRecord>& records);

struct CovarianceEstimate {
    Matrix sigma{};  // symmetrized, eigenvalue-clipped at zero
    int lag_cutoff = 0;
    std::vector<Matrix> per_lag_terms;  // raw C_k, k = 0..lag_cutoff
    std::size_t n_increments = 0;
};

// sigma_ij = Cov(Z_0i, Z_0j) + 2 sum_k Cov(Z_0i, Z_kj) with Z = Y - mean(Y);
// lags never cross record boundaries.
CovarianceEstimate estimate_covariance(const std::vector<RegenerationRecord>& records, int lag_cutoff = 20);

struct TailFit {
    double prefactor = 0;   // C in  P(T_1 > n) ~ C e^{-c n}
    double rate = 0;        // c (positive for a decaying tail)
    double r_squared = 0;
    std::size_t points = 0;  // survival points entering the fit
};

// Least squares on (n, log P(T_1 > n)) over points with P >= 10/samples.
TailFit fit_tail(const std::vector<long long>& samples);

}  // namespace opcwalk
