#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "irsim/errors.hpp"

namespace irsim::life {

/// Toroidal boolean grid, row-major. Every cell has exactly eight neighbors.
struct CellGrid {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> cells; // 1 = alive

    static CellGrid empty(std::uint32_t w, std::uint32_t h) {
        if (w == 0 || h == 0) throw ConfigError("grid: zero-size grid");
        CellGrid g;
        g.width = w;
        g.height = h;
        g.cells.assign(static_cast<std::size_t>(w) * h, 0);
        return g;
    }

    std::size_t size() const { return cells.size(); }

    bool in_range(std::uint32_t cell) const { return cell < cells.size(); }

    bool alive(std::uint32_t cell) const { return cells[cell] != 0; }
    bool alive_at(std::uint32_t x, std::uint32_t y) const {
        return cells[static_cast<std::size_t>(y) * width + x] != 0;
    }

    void set(std::uint32_t cell, bool v) { cells[cell] = v ? 1 : 0; }
    void set_at(std::uint32_t x, std::uint32_t y, bool v) {
        cells[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }

    std::uint32_t index_of(std::uint32_t x, std::uint32_t y) const { return y * width + x; }

    std::uint64_t alive_count() const {
        return std::accumulate(cells.begin(), cells.end(), std::uint64_t{0});
    }

    double density() const {
        return cells.empty() ? 0.0 : static_cast<double>(alive_count()) / static_cast<double>(size());
    }

    bool operator==(const CellGrid&) const = default;
};

/// Living cells among the eight toroidal neighbors of (x, y); the cell's own
/// state is excluded.
inline int neighbor_count_xy(const CellGrid& g, std::uint32_t x, std::uint32_t y) {
    const std::uint32_t xl = (x == 0) ? g.width - 1 : x - 1;
    const std::uint32_t xr = (x + 1 == g.width) ? 0 : x + 1;
    const std::uint32_t yu = (y == 0) ? g.height - 1 : y - 1;
    const std::uint32_t yd = (y + 1 == g.height) ? 0 : y + 1;
    const auto* c = g.cells.data();
    const std::size_t ru = static_cast<std::size_t>(yu) * g.width;
    const std::size_t rm = static_cast<std::size_t>(y) * g.width;
    const std::size_t rd = static_cast<std::size_t>(yd) * g.width;
    return c[ru + xl] + c[ru + x] + c[ru + xr] + c[rm + xl] + c[rm + xr] + c[rd + xl] +
           c[rd + x] + c[rd + xr];
}

/// Perception of a cell agent: the number of living neighbors.
inline int perception_cell(const CellGrid& g, std::uint32_t cell) {
    if (!g.in_range(cell)) throw ModelError("perception_cell: cell index out of range");
    return neighbor_count_xy(g, cell % g.width, cell / g.width);
}

/// Memorization of a cell agent: its next state under B3/S23.
inline bool memorization_cell(int neighbor_count, bool currently_alive) {
    return currently_alive ? (neighbor_count == 2 || neighbor_count == 3) : (neighbor_count == 3);
}

/// The influence a cell emits: exactly its memorized next state.
struct CellInfluence {
    std::uint32_t cell = 0;
    bool next_alive = false;

    bool operator==(const CellInfluence&) const = default;
};

inline CellInfluence decision_cell(std::uint32_t cell, bool next_state) {
    return CellInfluence{cell, next_state};
}

/// Plain-text dump: one row per line, '.' dead, '#' alive.
inline std::string grid_to_text(const CellGrid& g) {
    std::string out;
    out.reserve((static_cast<std::size_t>(g.width) + 1) * g.height);
    for (std::uint32_t y = 0; y < g.height; ++y) {
        for (std::uint32_t x = 0; x < g.width; ++x) out += g.alive_at(x, y) ? '#' : '.';
        out += '\n';
    }
    return out;
}

inline CellGrid grid_from_text(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        if (nl > pos) lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (lines.empty()) throw ConfigError("grid text: empty document");
    const std::size_t w = lines.front().size();
    CellGrid g = CellGrid::empty(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(lines.size()));
    for (std::size_t y = 0; y < lines.size(); ++y) {
        if (lines[y].size() != w) throw ConfigError("grid text: ragged rows");
        for (std::size_t x = 0; x < w; ++x) {
            const char ch = lines[y][x];
            if (ch == '#')
                g.set_at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), true);
            else if (ch != '.')
                throw ConfigError("grid text: unexpected character");
        }
    }
    return g;
}

} // namespace irsim::life
