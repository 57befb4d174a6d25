#pragma once

// Two-walk machinery: simultaneous regenerations of a coupled pair of walks
// (sharing one environment or running on independent copies), plug-in
// total-variation distance between the joint and product laws of the first
// simultaneous increment, and annulus escape probabilities of the whitened
// separation skeleton.

#include <array>
#include <cstdint>
#include <vector>

#include "opcwalk/environment.hpp"
#include "opcwalk/regeneration.hpp"
#include "opcwalk/stats.hpp"
#include "opcwalk/walker.hpp"

namespace opcwalk {

enum class PairMode { joint, independent };

// Summary of one simultaneous-regeneration increment: duration, the block
// displacement of each walk, and their separation at the closing time.
struct XiSummary {
    long long tau_sim = 0;
    std::array<std::int32_t, kMaxDim> y1{};
    std::array<std::int32_t, kMaxDim> y2{};
    std::array<std::int32_t, kMaxDim> end_separation{};
};

struct PairWalkRecord {
    PairMode mode = PairMode::joint;
    Site start1, start2;
    WalkPath path1, path2;  // filled only when requested (debug dumps)
    std::vector<long long> sim_times;  // T^sim_0 = 0 first, then T^sim_1 < ...
    std::vector<std::array<std::int32_t, kMaxDim>> marks1, marks2;  // X, X' at the sim times
    std::vector<XiSummary> xi_summaries;  // one per simultaneous increment
    std::vector<long long> times1, times2;  // individual regeneration times consumed
    bool complete = true;
    long long steps_scanned = 0;
};

struct PairOptions {
    RegenOptions regen;     // per-walk scan budget
    bool keep_paths = false;
    int tau_clip = 64;      // summary resolution for the increment duration
};

// Advances a walk along its permutation stream (the same law as sample_walk,
// but replayable site by site, so it retraces the scanner's certified path).
WalkPath stream_walk(const Site& start, long long steps, const Environment& env,
                     const PermutationStream& perms, WalkStats* stats = nullptr);

// Runs two walks with independent permutation streams until `target` common
// regeneration times are found.  Joint mode requires env1 and env2 to be the
// same handle; independent mode requires distinct ones.
PairWalkRecord run_pair(PairMode mode, const Site& x1, const Site& x2, int target, int m,
                        const Environment& env1, const Environment& env2,
                        std::uint64_t walk_seed1, std::uint64_t walk_seed2,
                        const PairOptions& opts = {});

// Finite summary of an increment used for the plug-in TV histograms.
using XiKey = std::array<std::int32_t, 1 + 3 * kMaxDim>;
XiKey summarize_xi(const XiSummary& xi, int tau_clip);

// Half the L1 distance between the empirical distributions of two key
// multisets.  Equal multisets give 0, disjoint supports give 1.
double plugin_tv(const std::vector<XiKey>& a, const std::vector<XiKey>& b);

struct PairConfig {
    LatticeConfig lattice;
    WeightFieldSpec weight_spec;
    int m = 1;
    std::uint64_t master_seed = 1;
    int threads = 1;
    PairOptions options;
    int max_skeleton = 100000;  // annulus: skeleton length before a pair is censored
    int bootstrap_rounds = 200;
};

struct TvResult {
    double tv = 0;             // plug-in total variation of the summary laws
    double ci_halfwidth = 0;   // bootstrap standard-error band (1.96 sigma)
    std::size_t n_joint = 0;   // usable first increments per law
    std::size_t n_indep = 0;
    std::size_t n_dropped = 0;  // pairs whose first common regeneration ran out of budget
};

// Samples the first simultaneous increment n_samples times under the shared
// environment and n_samples times under the product law, both conditioned on
// the starts sitting in the backbone, and compares the summary histograms.
TvResult estimate_tv(const Site& x1, const Site& x2, int n_samples, const PairConfig& cfg);

// Harmonic escape profile: the probability that the separation hits r2 before
// r1 when started at r.  Power form in d = 2, log form in d >= 3.
double f_d_reference(double r, double r1, double r2, int d);

struct AnnulusSpec {
    double r1 = 10;
    double r2 = 40;
    Matrix u{};         // whitening map, ||U(X - X')||_inf; identity when zero
    double min_r1 = 2;  // radii below the lattice resolution are rejected
};

struct AnnulusResult {
    double p_hat = 0;         // empirical P(outer radius hit first)
    double ci_halfwidth = 0;  // binomial normal-approximation band
    double f_d_value = 0;     // reference profile at the realized radius
    double realized_r = 0;    // whitened start separation after rounding
    std::array<std::int32_t, kMaxDim> start_offset{};
    int n_outward = 0;
    int n_inward = 0;
    int n_censored = 0;  // budget or skeleton cap hit before either exit
};

// Integer start offset whose whitened sup-norm is closest to r (ties resolved
// by shortest L1 length, then lexicographically); searches the box
// ||v||_inf <= ceil(2 r).
std::array<std::int32_t, kMaxDim> realize_separation(const Matrix& u, double r, int d);

double whitened_norm(const Matrix& u, const std::array<std::int32_t, kMaxDim>& v, int d);

// Cholesky-based U with U^T U = sigma^{-1} on the leading d x d block.
Matrix whitening_from_covariance(const Matrix& sigma, int d);

// Tracks the whitened separation of independent pairs along their
// simultaneous regeneration skeleton until it leaves (r1, r2).
AnnulusResult annulus_experiment(const AnnulusSpec& spec, double r, int n_samples, const PairConfig& cfg);

}  // namespace opcwalk
