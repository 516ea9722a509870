#pragma once

#include "irsim/life/grid.hpp"

namespace irsim::life {

/// Directly-coded synchronous Game of Life step, kept deliberately separate
/// from the engine path so the two can cross-check each other. Shares only
/// the grid container.
inline CellGrid life_oracle_step(const CellGrid& g) {
    CellGrid out = g;
    for (std::uint32_t y = 0; y < g.height; ++y) {
        for (std::uint32_t x = 0; x < g.width; ++x) {
            int count = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const std::uint32_t nx = (x + g.width + dx) % g.width;
                    const std::uint32_t ny = (y + g.height + dy) % g.height;
                    count += g.alive_at(nx, ny) ? 1 : 0;
                }
            }
            const bool alive = g.alive_at(x, y);
            out.set_at(x, y, count == 3 || (alive && count == 2));
        }
    }
    return out;
}

} // namespace irsim::life
