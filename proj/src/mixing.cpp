#include "opcwalk/mixing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "opcwalk/hashing.hpp"

namespace opcwalk {

std::string to_string(MixingMode m) { return m == MixingMode::alpha ? "alpha" : "phi"; }

std::string to_string(MixingAxis a) {
    switch (a) {
        case MixingAxis::time: return "time";
        case MixingAxis::space: return "space";
        case MixingAxis::spacetime: return "spacetime";
    }
    return "?";
}

namespace {

// Site at `steps` unit moves along the chosen axis.
Site axis_site(MixingAxis axis, std::int64_t steps) {
    switch (axis) {
        case MixingAxis::time: return make_site({0}, steps);
        case MixingAxis::space: return make_site({static_cast<std::int32_t>(steps)}, 0);
        case MixingAxis::spacetime: return make_site({static_cast<std::int32_t>(steps)}, steps);
    }
    return Site{};
}

struct BitMatrix {
    std::size_t words = 0;
    std::vector<std::uint64_t> bits;  // row-major: row * words + w

    BitMatrix(std::size_t rows, std::size_t words_) : words(words_), bits(rows * words_, 0) {}
    void set(std::size_t row, std::size_t replica, bool v) {
        if (v) bits[row * words + replica / 64] |= 1ull << (replica % 64);
    }
    const std::uint64_t* row(std::size_t r) const { return bits.data() + r * words; }
};

std::size_t popcount_and(const std::uint64_t* a, const std::uint64_t* b, std::size_t words,
                         std::size_t rot) {
    // b is rotated by `rot` whole words: pairs replica i with replica i + 64*rot.
    std::size_t total = 0;
    for (std::size_t w = 0; w < words; ++w) {
        std::size_t wb = w + rot;
        if (wb >= words) wb -= words;
        total += static_cast<std::size_t>(std::popcount(a[w] & b[wb]));
    }
    return total;
}

std::size_t popcount_row(const std::uint64_t* a, std::size_t words) {
    std::size_t total = 0;
    for (std::size_t w = 0; w < words; ++w) total += static_cast<std::size_t>(std::popcount(a[w]));
    return total;
}

}  // namespace

MixingEstimate estimate_mixing(const WeightFieldSpec& spec, int d, MixingMode mode, MixingAxis axis,
                               const std::vector<int>& gaps, std::size_t samples, std::uint64_t seed,
                               const MixingOptions& opts) {
    if (samples < 1000)
        throw std::invalid_argument("estimate_mixing: need at least 1000 samples for a calibrated bound");
    if (gaps.empty()) throw std::invalid_argument("estimate_mixing: no gaps requested");
    for (int g : gaps)
        if (g < 0) throw std::invalid_argument("estimate_mixing: gaps must be >= 0");

    LatticeConfig cfg;
    cfg.d = d;
    cfg.p = 0.5;  // irrelevant to the weight field; required by validation
    auto spec_errors = validate_weight_spec(spec, d);
    if (!spec_errors.empty()) throw std::invalid_argument("estimate_mixing: " + spec_errors.front());

    // Threshold from a pilot sample on a disjoint seed stream: the median of
    // the single-site marginal.  Fixed before any tallying.
    std::vector<double> pilot;
    pilot.reserve(static_cast<std::size_t>(opts.pilot));
    for (int i = 0; i < opts.pilot; ++i) {
        WeightField f(derive_seed(seed, SeedTag::mixing, 1'000'000'000ull + static_cast<std::uint64_t>(i)),
                      cfg, spec);
        pilot.push_back(f.at(Site{}));
    }
    std::sort(pilot.begin(), pilot.end());
    double threshold = 0.5 * (pilot[pilot.size() / 2 - 1] + pilot[pilot.size() / 2]);
    // Discrete marginals can put the median on an attained value, collapsing
    // the event to "always true"; fall back to the midrange split then.
    {
        auto freq = [&](double t) {
            std::size_t c = 0;
            for (double v : pilot)
                if (v <= t) ++c;
            return static_cast<double>(c) / static_cast<double>(pilot.size());
        };
        double f = freq(threshold);
        if (f > 0.95 || f < 0.05) threshold = 0.5 * (pilot.front() + pilot.back());
    }

    const std::size_t words = (samples / 64 == 0) ? 1 : samples / 64;
    const std::size_t n = words * 64;  // replicas used; rounded down to whole words

    // Event family: per side, event 0 = {K(s0) <= theta}, event 1 = the same
    // on the 2-site block {s0, s0+1}.  The B-side copy of each event starts
    // gap+1 axis units beyond the A event's last support site.
    const std::size_t kEvents = 2;
    BitMatrix a_bits(kEvents, words);
    BitMatrix b_bits(kEvents * kEvents * gaps.size(), words);
    auto b_row = [&](std::size_t gi, std::size_t ae, std::size_t be) {
        return (gi * kEvents + ae) * kEvents + be;
    };

    for (std::size_t i = 0; i < n; ++i) {
        WeightField f(derive_seed(seed, SeedTag::mixing, static_cast<std::uint64_t>(i)), cfg, spec);
        auto below = [&](std::int64_t steps) { return f.at(axis_site(axis, steps)) <= threshold; };
        bool a0 = below(0);
        bool a1 = a0 && below(1);
        a_bits.set(0, i, a0);
        a_bits.set(1, i, a1);
        for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
            for (std::size_t ae = 0; ae < kEvents; ++ae) {
                std::int64_t a_last = static_cast<std::int64_t>(ae);  // last support site of A
                std::int64_t start = a_last + gaps[gi] + 1;
                bool b0 = below(start);
                bool b1 = b0 && below(start + 1);
                b_bits.set(b_row(gi, ae, 0), i, b0);
                b_bits.set(b_row(gi, ae, 1), i, b1);
            }
        }
    }

    // Marginal counts.
    std::vector<std::size_t> ca(kEvents);
    for (std::size_t e = 0; e < kEvents; ++e) ca[e] = popcount_row(a_bits.row(e), words);

    auto pair_stat = [&](std::size_t gi, std::size_t ae, std::size_t be, std::size_t rot) -> double {
        const std::uint64_t* a = a_bits.row(ae);
        const std::uint64_t* b = b_bits.row(b_row(gi, ae, be));
        double pa = static_cast<double>(ca[ae]) / static_cast<double>(n);
        double pb = static_cast<double>(popcount_row(b, words)) / static_cast<double>(n);
        double pab = static_cast<double>(popcount_and(a, b, words, rot)) / static_cast<double>(n);
        if (mode == MixingMode::alpha) return std::fabs(pab - pa * pb);
        if (pa < opts.phi_min_pa) return 0.0;
        return std::fabs(pab / pa - pb);
    };

    MixingEstimate out;
    out.mode = mode;
    out.axis = axis;
    out.gaps = gaps;
    out.samples = n;
    out.event_family = "threshold<=median on single sites and 2-site blocks";
    for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
        double best = 0;
        for (std::size_t ae = 0; ae < kEvents; ++ae)
            for (std::size_t be = 0; be < kEvents; ++be) best = std::max(best, pair_stat(gi, ae, be, 0));
        out.coefficients.push_back(best);
    }

    // Null calibration: rotate the B side by a random number of whole words;
    // under independence this reproduces the sampling law of the max
    // statistic over the entire family.
    CounterRng rot_rng(derive_seed(seed, SeedTag::bootstrap));
    std::vector<double> null_max;
    null_max.reserve(static_cast<std::size_t>(opts.rotations));
    for (int r = 0; r < opts.rotations; ++r) {
        std::size_t rot = 1 + rot_rng.next_below(words - 1);
        double best = 0;
        for (std::size_t gi = 0; gi < gaps.size(); ++gi)
            for (std::size_t ae = 0; ae < kEvents; ++ae)
                for (std::size_t be = 0; be < kEvents; ++be)
                    best = std::max(best, pair_stat(gi, ae, be, rot));
        null_max.push_back(best);
    }
    std::sort(null_max.begin(), null_max.end());
    std::size_t q = static_cast<std::size_t>(opts.quantile * static_cast<double>(null_max.size() - 1));
    out.ci_halfwidth = null_max[q];
    return out;
}

}  // namespace opcwalk
