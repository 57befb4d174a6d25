#pragma once

// Empirical mixing coefficients of a weight field.
//
// The true alpha/phi coefficients take a supremum over all events measurable
// far apart; that is not computable, so we restrict to a finite family of
// cylinder events (threshold events on single sites and on 2-site blocks) and
// report, per gap n, the maximum dependence over ordered event pairs whose
// supports are n+1 apart along the chosen axis.  The result is a certified
// lower bound for the true coefficient.
//
// ci_halfwidth is calibrated under the independence null: replica-block
// rotations of the B-side indicators break the pairing while preserving both
// marginals, and the reported value is a high quantile of the rotated max
// statistic over the whole (gap, pair) family.  An estimate within
// ci_halfwidth is therefore statistically indistinguishable from zero.

#include <cstdint>
#include <string>
#include <vector>

#include "opcwalk/weights.hpp"

namespace opcwalk {

enum class MixingMode { alpha, phi };
enum class MixingAxis { time, space, spacetime };

std::string to_string(MixingMode);
std::string to_string(MixingAxis);

struct MixingEstimate {
    MixingMode mode = MixingMode::alpha;
    MixingAxis axis = MixingAxis::time;
    std::vector<int> gaps;
    std::vector<double> coefficients;  // one per gap, in [0, 1]
    double ci_halfwidth = 0.0;
    std::size_t samples = 0;  // replicas actually used (rounded to words)
    std::string event_family;
};

struct MixingOptions {
    int rotations = 400;      // null-calibration resamples
    double quantile = 1.0;    // family-wise null quantile for ci_halfwidth (1 = max)
    double phi_min_pa = 0.05; // phi pairs require P(A) at least this
    int pilot = 2000;         // pilot replicas used to fix the median threshold
};

MixingEstimate estimate_mixing(const WeightFieldSpec& spec, int d, MixingMode mode, MixingAxis axis,
                               const std::vector<int>& gaps, std::size_t samples, std::uint64_t seed,
                               const MixingOptions& opts = {});

}  // namespace opcwalk
