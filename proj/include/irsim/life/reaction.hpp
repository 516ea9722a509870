#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "irsim/life/grid.hpp"
#include "irsim/rng.hpp"

namespace irsim::life {

struct ReactionOutcome {
    CellGrid grid;
    std::uint32_t vetoed = 0; // dying influences ignored this step
    std::uint32_t dying = 0;  // alive cells whose influence said dead
};

namespace detail {

// Validates exactly one influence per cell and lays them out per cell.
// 0 = dead, 1 = alive, 0xFF = not seen yet.
inline void layout_influences(const CellGrid& g, std::span<const CellInfluence> influences,
                              std::vector<std::uint8_t>& next) {
    next.assign(g.size(), 0xFF);
    for (const auto& inf : influences) {
        if (!g.in_range(inf.cell))
            throw ModelError("reaction: influence for a cell outside the grid");
        if (next[inf.cell] != 0xFF)
            throw ModelError("reaction: two influences for cell " + std::to_string(inf.cell));
        next[inf.cell] = inf.next_alive ? 1 : 0;
    }
    for (std::size_t c = 0; c < next.size(); ++c)
        if (next[c] == 0xFF)
            throw ModelError("reaction: missing influence for cell " + std::to_string(c));
}

} // namespace detail

/// Applies the per-cell influences, except that a dying cell's influence is
/// ignored with probability p (one uniform draw from the cell's own stream).
/// Dead cells and surviving or born cells follow their influences exactly.
inline ReactionOutcome reaction_life(const CellGrid& g, std::span<const CellInfluence> influences,
                                     double p, const StreamFamily& rng) {
    std::vector<std::uint8_t> next;
    detail::layout_influences(g, influences, next);

    ReactionOutcome out;
    out.grid = g;
    for (std::uint32_t c = 0; c < g.size(); ++c) {
        const bool alive = g.alive(c);
        const bool wants_alive = next[c] != 0;
        if (alive && !wants_alive) {
            ++out.dying;
            if (p > 0.0 && rng.unit(c) < p) {
                ++out.vetoed; // stays alive
                continue;
            }
        }
        out.grid.cells[c] = wants_alive ? 1 : 0;
    }
    return out;
}

} // namespace irsim::life
