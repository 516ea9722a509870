#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "irsim/life/grid.hpp"
#include "irsim/life/reaction.hpp"
#include "irsim/rng.hpp"

namespace irsim::mlife {

struct ControlledOutcome {
    life::CellGrid grid;
    std::uint32_t rejected = 0; // micro influences vetoed by a command
    std::uint32_t dying = 0;    // alive cells whose influence said dead
};

/// Applies the per-cell influences under mesoscopic control: for each cell a
/// uniform draw is compared against its command, and a dying cell is kept
/// alive when command > rand. Births and survivals always follow the
/// influences. Cells without a command default to 0, which never fires.
inline ControlledOutcome reaction_micro_controlled(const life::CellGrid& g,
                                                   std::span<const life::CellInfluence> influences,
                                                   std::span<const double> commands,
                                                   const StreamFamily& rng) {
    if (commands.size() != g.size())
        throw ModelError("controlled reaction: need one command slot per cell");
    std::vector<std::uint8_t> next;
    life::detail::layout_influences(g, influences, next);

    ControlledOutcome out;
    out.grid = g;
    for (std::uint32_t c = 0; c < g.size(); ++c) {
        const bool alive = g.alive(c);
        const bool wants_alive = next[c] != 0;
        if (alive && !wants_alive) {
            ++out.dying;
            if (commands[c] > 0.0 && commands[c] > rng.unit(c)) {
                ++out.rejected; // stays alive
                continue;
            }
        }
        out.grid.cells[c] = wants_alive ? 1 : 0;
    }
    return out;
}

/// Percentage of microscopic influences not applied by the reaction.
inline double rejected_rate(std::uint64_t rejected_count, std::uint64_t total_influences) {
    if (total_influences == 0) throw std::domain_error("rejected_rate: no influences");
    return 100.0 * static_cast<double>(rejected_count) / static_cast<double>(total_influences);
}

} // namespace irsim::mlife
