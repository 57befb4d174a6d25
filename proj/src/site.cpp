#include "opcwalk/site.hpp"

#include <algorithm>

namespace opcwalk {

std::string to_string(Neighborhood nb) {
    switch (nb) {
        case Neighborhood::corners: return "corners";
        case Neighborhood::shell: return "shell";
        case Neighborhood::shell_with_self: return "shell_with_self";
    }
    return "?";
}

void validate_lattice(const LatticeConfig& cfg) {
    if (cfg.d < 1 || cfg.d > kMaxDim)
        throw std::invalid_argument("lattice dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (!(cfg.p > 0.0) || cfg.p > 1.0)
        throw std::invalid_argument("percolation parameter p must lie in (0, 1]");
    if (cfg.horizon < 1)
        throw std::invalid_argument("horizon must be >= 1");
}

NeighborTable::NeighborTable(const LatticeConfig& cfg) {
    validate_lattice(cfg);
    std::array<std::int8_t, kMaxDim> off{};
    // Enumerate component values in increasing order so the table comes out
    // lexicographic on the offset vector.
    auto emit = [&](auto&& self, int k) -> void {
        if (k == cfg.d) {
            bool all_zero = std::all_of(off.begin(), off.end(), [](std::int8_t v) { return v == 0; });
            switch (cfg.neighborhood) {
                case Neighborhood::corners:
                    break;  // filtered below by the candidate list
                case Neighborhood::shell:
                    if (all_zero) return;
                    break;
                case Neighborhood::shell_with_self:
                    break;
            }
            offsets_.push_back(off);
            return;
        }
        if (cfg.neighborhood == Neighborhood::corners) {
            for (std::int8_t v : {std::int8_t{-1}, std::int8_t{1}}) {
                off[static_cast<std::size_t>(k)] = v;
                self(self, k + 1);
            }
        } else {
            for (std::int8_t v : {std::int8_t{-1}, std::int8_t{0}, std::int8_t{1}}) {
                off[static_cast<std::size_t>(k)] = v;
                self(self, k + 1);
            }
        }
        off[static_cast<std::size_t>(k)] = 0;
    };
    emit(emit, 0);
}

std::vector<Site> neighbors(const Site& s, const LatticeConfig& cfg) {
    NeighborTable table(cfg);
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(table.size()));
    for (int i = 0; i < table.size(); ++i) out.push_back(table.apply(s, i));
    return out;
}

}  // namespace opcwalk
