#pragma once

#include <cstdint>
#include <utility>

#include "irsim/errors.hpp"
#include "irsim/life/grid.hpp"
#include "irsim/rng.hpp"
#include "irsim/time.hpp"

namespace irsim::lab {

/// Per-step metrics of one replication. Which columns are populated depends
/// on the experiment's metric selection.
struct TimeSeriesRow {
    std::uint32_t replication = 0;
    Tick step = 0;
    double rho = 0.0;
    double cluster_mean = 0.0;
    double cluster_var = 0.0;
    double r = 0.0; // rejected-influence percentage
    std::uint32_t changed = 0;
};

struct ConvergenceReport {
    std::uint32_t replication = 0;
    bool converged = false;
    Tick steps_to_steady = 0; // the cap when not converged
    double final_density = 0.0;
};

/// Random board: each cell alive independently with the given probability.
inline life::CellGrid init_random_grid(std::uint32_t width, std::uint32_t height, double density,
                                       const StreamFamily& rng) {
    if (density < 0.0 || density > 1.0)
        throw ConfigError("init_random_grid: density out of [0, 1]");
    life::CellGrid g = life::CellGrid::empty(width, height);
    for (std::uint32_t c = 0; c < g.size(); ++c)
        if (rng.unit(c) < density) g.cells[c] = 1;
    return g;
}

/// Still-life test: the two consecutive boards are identical cell for cell.
inline bool detect_steady(const life::CellGrid& prev, const life::CellGrid& cur) {
    if (prev.width != cur.width || prev.height != cur.height)
        throw ConfigError("detect_steady: dimension mismatch");
    return prev.cells == cur.cells;
}

inline std::uint32_t changed_cells(const life::CellGrid& prev, const life::CellGrid& cur) {
    if (prev.width != cur.width || prev.height != cur.height)
        throw ConfigError("changed_cells: dimension mismatch");
    std::uint32_t n = 0;
    for (std::size_t c = 0; c < cur.cells.size(); ++c)
        if (prev.cells[c] != cur.cells[c]) ++n;
    return n;
}

/// Mean and population variance of the density over all square regions of
/// the given side.
inline std::pair<double, double> cluster_stats(const life::CellGrid& g, std::uint32_t region_size) {
    if (region_size == 0 || g.width % region_size != 0 || g.height % region_size != 0)
        throw ConfigError("cluster_stats: grid dimensions must be multiples of the region size");
    const std::uint32_t rx = g.width / region_size;
    const std::uint32_t ry = g.height / region_size;
    const double cells_per_region = static_cast<double>(region_size) * region_size;
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint32_t gy = 0; gy < ry; ++gy) {
        for (std::uint32_t gx = 0; gx < rx; ++gx) {
            std::uint64_t alive = 0;
            for (std::uint32_t y = gy * region_size; y < (gy + 1) * region_size; ++y)
                for (std::uint32_t x = gx * region_size; x < (gx + 1) * region_size; ++x)
                    alive += g.cells[static_cast<std::size_t>(y) * g.width + x];
            const double d = static_cast<double>(alive) / cells_per_region;
            sum += d;
            sum_sq += d * d;
        }
    }
    const double count = static_cast<double>(rx) * ry;
    const double mean = sum / count;
    return {mean, sum_sq / count - mean * mean};
}

} // namespace irsim::lab
