#include "opcwalk/weights.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "opcwalk/hashing.hpp"

namespace opcwalk {

std::string to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::constant: return "constant";
        case WeightKind::iid: return "iid";
        case WeightKind::time_markov: return "time_markov";
        case WeightKind::berger: return "berger";
        case WeightKind::m_dependent: return "m_dependent";
    }
    return "?";
}

std::vector<std::string> validate_weight_spec(const WeightFieldSpec& spec, int d) {
    std::vector<std::string> errors;
    switch (spec.kind) {
        case WeightKind::constant:
            if (!(spec.constant_value > 0.0)) errors.push_back("constant value must be > 0");
            break;
        case WeightKind::iid:
            if (!(spec.iid_lo > 0.0)) errors.push_back("iid lower bound must be > 0");
            if (!(spec.iid_hi >= spec.iid_lo)) errors.push_back("iid upper bound must be >= lower bound");
            break;
        case WeightKind::time_markov: {
            std::size_t k = spec.markov_values.size();
            if (k < 2) errors.push_back("time_markov needs at least 2 states");
            if (k > 16) errors.push_back("time_markov supports at most 16 states");
            for (double v : spec.markov_values)
                if (!(v > 0.0)) errors.push_back("time_markov state values must be > 0");
            if (spec.markov_transition.size() != k) {
                errors.push_back("time_markov transition matrix must be square over the states");
                break;
            }
            for (const auto& row : spec.markov_transition) {
                if (row.size() != k) {
                    errors.push_back("time_markov transition matrix must be square over the states");
                    break;
                }
                double sum = 0;
                for (double q : row) {
                    if (q < 0.0) errors.push_back("time_markov transition entries must be >= 0");
                    sum += q;
                }
                if (std::abs(sum - 1.0) > 1e-9) errors.push_back("time_markov transition rows must sum to 1");
            }
            if (spec.markov_stationary.size() != k) {
                errors.push_back("time_markov stationary law must have one entry per state");
                break;
            }
            double total = 0;
            for (double q : spec.markov_stationary) {
                if (q < 0.0) errors.push_back("time_markov stationary entries must be >= 0");
                total += q;
            }
            if (std::abs(total - 1.0) > 1e-9) errors.push_back("time_markov stationary law must sum to 1");
            // stationarity: pi P == pi
            for (std::size_t j = 0; j < k; ++j) {
                double pj = 0;
                for (std::size_t i = 0; i < k; ++i)
                    pj += spec.markov_stationary[i] * spec.markov_transition[i][j];
                if (std::abs(pj - spec.markov_stationary[j]) > 1e-7) {
                    errors.push_back("time_markov initial law is not stationary for the transition matrix");
                    break;
                }
            }
            break;
        }
        case WeightKind::berger:
            if (d != 1) errors.push_back("berger weights are defined for d = 1 only");
            break;
        case WeightKind::m_dependent:
            if (spec.mdep_radius < 1) errors.push_back("m_dependent radius must be >= 1");
            if (spec.mdep_radius > 8) errors.push_back("m_dependent radius must be <= 8");
            if (!(spec.mdep_floor > 0.0)) errors.push_back("m_dependent floor must be > 0");
            break;
    }
    return errors;
}

WeightField::WeightField(std::uint64_t seed, const LatticeConfig& cfg, const WeightFieldSpec& spec)
    : seed_(seed), cfg_(cfg), spec_(spec) {
    auto errors = validate_weight_spec(spec, cfg.d);
    if (!errors.empty()) throw std::invalid_argument("weight spec: " + errors.front());
}

namespace {

inline int mod3(std::int64_t v) { return static_cast<int>(((v % 3) + 3) % 3); }

}  // namespace

double WeightField::at(const Site& s) const {
    switch (spec_.kind) {
        case WeightKind::constant:
            return spec_.constant_value;
        case WeightKind::iid: {
            std::uint64_t h = site_hash(derive_seed(seed_, SeedTag::weight_iid), s);
            return spec_.iid_lo + (spec_.iid_hi - spec_.iid_lo) * u01(h);
        }
        case WeightKind::berger: {
            // beta depends on the time coordinate only.
            std::uint64_t h = hash_words(derive_seed(seed_, SeedTag::weight_berger),
                                         {static_cast<std::uint64_t>(s.n)});
            int beta = static_cast<int>(bounded(h, 3));
            std::int64_t x = s.x[0];
            return static_cast<double>(mod3(beta + 3 * std::llabs(x) + x) + 1);
        }
        case WeightKind::time_markov: {
            double v;
            if (memo_.lookup(s, v)) return v;
            v = markov_at(s);
            memo_.store(s, v);
            return v;
        }
        case WeightKind::m_dependent: {
            double v;
            if (memo_.lookup(s, v)) return v;
            v = mdep_at(s);
            memo_.store(s, v);
            return v;
        }
    }
    throw std::logic_error("unreachable weight kind");
}

// Exact stationary sample of the column chain at time s.n via coupling from
// the past: compose the inverse-CDF update maps u_t backwards from s.n until
// the composition is a constant map.  The update variables are keyed by
// (column, t), so samples at different times of one column are automatically
// consistent states of a single chain trajectory.
double WeightField::markov_at(const Site& s) const {
    const auto& P = spec_.markov_transition;
    const int k = static_cast<int>(spec_.markov_values.size());
    std::uint64_t column_key = derive_seed(seed_, SeedTag::weight_markov);
    for (int i = 0; i < cfg_.d; ++i)
        column_key = hash_mix(column_key, static_cast<std::uint64_t>(
                                              static_cast<std::int64_t>(s.x[static_cast<std::size_t>(i)])));

    std::array<std::uint8_t, 16> compose{};
    for (int i = 0; i < k; ++i) compose[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);

    const int cap = 1 << 16;
    for (int back = 1; back <= cap; ++back) {
        std::int64_t t = s.n - back;
        double u = u01(hash_mix(column_key, static_cast<std::uint64_t>(t)));
        // inverse-CDF update map for step t -> t+1
        std::array<std::uint8_t, 16> g{};
        for (int i = 0; i < k; ++i) {
            double acc = 0;
            int target = k - 1;
            for (int j = 0; j < k; ++j) {
                acc += P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (u < acc) { target = j; break; }
            }
            g[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(target);
        }
        // extend the backward composition: F_{back} = F_{back-1} o g
        std::array<std::uint8_t, 16> next{};
        for (int i = 0; i < k; ++i)
            next[static_cast<std::size_t>(i)] = compose[g[static_cast<std::size_t>(i)]];
        compose = next;
        bool constant = true;
        for (int i = 1; i < k; ++i)
            if (compose[static_cast<std::size_t>(i)] != compose[0]) { constant = false; break; }
        if (constant) return spec_.markov_values[compose[0]];
    }
    throw std::runtime_error("time_markov chain failed to coalesce; transition matrix mixes too slowly");
}

double WeightField::mdep_at(const Site& s) const {
    const int w = spec_.mdep_radius;
    std::uint64_t base_seed = derive_seed(seed_, SeedTag::weight_mdep);
    double sum = 0.0;
    std::size_t count = 0;
    Site t;
    // iterate the space-time ball of radius w (box in max-norm)
    std::array<int, kMaxDim> lo{}, hi{};
    for (int i = 0; i < cfg_.d; ++i) {
        lo[static_cast<std::size_t>(i)] = s.x[static_cast<std::size_t>(i)] - w;
        hi[static_cast<std::size_t>(i)] = s.x[static_cast<std::size_t>(i)] + w;
    }
    std::array<int, kMaxDim> cur = lo;
    for (;;) {
        for (std::int64_t dn = -w; dn <= w; ++dn) {
            for (int i = 0; i < cfg_.d; ++i)
                t.x[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(cur[static_cast<std::size_t>(i)]);
            t.n = s.n + dn;
            sum += u01(site_hash(base_seed, t));
            ++count;
        }
        int axis = 0;
        while (axis < cfg_.d) {
            if (++cur[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
            cur[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
            ++axis;
        }
        if (axis == cfg_.d) break;
    }
    return spec_.mdep_floor + sum / static_cast<double>(count);
}

}  // namespace opcwalk
