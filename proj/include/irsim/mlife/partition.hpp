#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "irsim/errors.hpp"
#include "irsim/life/grid.hpp"

namespace irsim::mlife {

/// Exact tiling of the grid into square regions of side region_size. The
/// grid dimensions must be multiples of the region size; there are no
/// partial edge regions.
struct RegionPartition {
    std::uint32_t region_size = 0;
    std::uint32_t grid_width = 0;
    std::uint32_t grid_height = 0;
    std::vector<std::vector<std::uint32_t>> regions; // region -> cell indices

    static RegionPartition tile(std::uint32_t width, std::uint32_t height,
                                std::uint32_t region_size) {
        if (region_size == 0) throw ConfigError("partition: region size must be positive");
        if (width % region_size != 0 || height % region_size != 0)
            throw ConfigError("partition: grid dimensions must be multiples of the region size");
        RegionPartition part;
        part.region_size = region_size;
        part.grid_width = width;
        part.grid_height = height;
        const std::uint32_t rx = width / region_size;
        const std::uint32_t ry = height / region_size;
        part.regions.reserve(static_cast<std::size_t>(rx) * ry);
        for (std::uint32_t gy = 0; gy < ry; ++gy) {
            for (std::uint32_t gx = 0; gx < rx; ++gx) {
                std::vector<std::uint32_t> cells;
                cells.reserve(static_cast<std::size_t>(region_size) * region_size);
                for (std::uint32_t y = gy * region_size; y < (gy + 1) * region_size; ++y)
                    for (std::uint32_t x = gx * region_size; x < (gx + 1) * region_size; ++x)
                        cells.push_back(y * width + x);
                part.regions.push_back(std::move(cells));
            }
        }
        return part;
    }

    std::size_t region_count() const { return regions.size(); }
};

/// Density of living cells in a region.
inline double perception_meso(const life::CellGrid& grid, std::span<const std::uint32_t> region) {
    if (region.empty()) throw ModelError("perception_meso: empty region");
    std::uint64_t alive = 0;
    for (std::uint32_t c : region) alive += grid.cells[c];
    return static_cast<double>(alive) / static_cast<double>(region.size());
}

/// The controller error signal: expected minus observed density. Positive
/// when the region is under target, which is when the rescue guard may fire.
inline double memorization_meso(double observed_density, double rho_plus) {
    return rho_plus - observed_density;
}

/// Target density and proportional gain of the mesoscopic controllers.
struct ControlParams {
    double rho_plus = 0.0;
    double k_p = 0.0;

    static ControlParams with_default_gain(double rho_plus) {
        return ControlParams{rho_plus, 10.0 * rho_plus};
    }
};

/// The per-cell command a region's controller sends into the cell level.
struct CellCommand {
    std::uint32_t cell = 0;
    double command = 0.0;
};

/// Every cell of the region receives the same command k_p * epsilon.
inline std::vector<CellCommand> decision_meso(double epsilon, double k_p,
                                              std::span<const std::uint32_t> region) {
    std::vector<CellCommand> out;
    out.reserve(region.size());
    const double command = k_p * epsilon;
    for (std::uint32_t c : region) out.push_back(CellCommand{c, command});
    return out;
}

} // namespace irsim::mlife
