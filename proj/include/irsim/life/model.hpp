#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "irsim/life/grid.hpp"
#include "irsim/life/lambda.hpp"
#include "irsim/life/reaction.hpp"
#include "irsim/rng.hpp"
#include "irsim/scheduler.hpp"
#include "irsim/simulation.hpp"

namespace irsim::life {

/// Environmental properties of the cell level: the board plus the veto
/// statistics of the last reaction (read by the experiment harness).
struct LifeSigma {
    CellGrid grid;
    std::uint32_t vetoed_last = 0;
    std::uint32_t dying_last = 0;
};

struct CellState {
    std::uint32_t cell = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    bool next_alive = false;
};

struct CellPercept {
    std::uint8_t neighbors = 0;
    bool alive = false;
};

struct LifeTraits {
    using Sigma = LifeSigma;
    using Payload = CellInfluence;
    using AgentState = CellState;
    using Percept = CellPercept;
};

using LifeSimulation = Simulation<LifeTraits>;

/// Root seed and replication index the model derives its streams from.
struct StreamContext {
    std::uint64_t root = 0;
    std::uint64_t replication = 0;
};

inline constexpr LevelId kCellLevel{0};

inline const CellGrid& current_grid(const LifeSimulation& sim) {
    return sim.level_states[kCellLevel.index].sigma.grid;
}

inline std::uint32_t vetoed_last(const LifeSimulation& sim) {
    return sim.level_states[kCellLevel.index].sigma.vetoed_last;
}

inline std::uint32_t dying_last(const LifeSimulation& sim) {
    return sim.level_states[kCellLevel.index].sigma.dying_last;
}

/// Wires the cell behaviors and the veto reaction into a one-level
/// simulation: one agent per cell, dt = 1, nothing retained across steps,
/// a static environment.
inline LifeSimulation build_life_simulation(const LifeParams& params, CellGrid grid,
                                            StreamContext rng = {}) {
    if (grid.width == 0 || grid.height == 0)
        throw ConfigError("life: zero-size grid");

    LifeSimulation sim;
    const LevelId cells = sim.graph.add_level("cells");

    sim.level_states.push_back(LevelState<LifeTraits>{LifeSigma{std::move(grid)}, {}, SimTime{0, 1}});

    const double p = params.p;
    const std::uint64_t root = rng.root;
    const std::uint64_t rep = rng.replication;
    sim.level_specs.push_back(LevelSpec<LifeTraits>{
        cells,
        [p, root, rep](LifeSigma&& sigma, std::span<const Influence<LifeTraits>> influences,
                       SimTime now) -> ReactionResult<LifeTraits> {
            std::vector<CellInfluence> per_cell;
            per_cell.reserve(influences.size());
            for (const auto& inf : influences) per_cell.push_back(inf.payload);
            StreamFamily draws(root, rep, kCellLevel.index, now.t);
            ReactionOutcome out = reaction_life(sigma.grid, per_cell, p, draws);
            return ReactionResult<LifeTraits>{
                LifeSigma{std::move(out.grid), out.vetoed, out.dying}, {}, now.advanced(1)};
        }});

    auto behaviors = std::make_shared<AgentBehaviors<LifeTraits>>();
    behaviors->levels.push_back({cells,
        LevelBehavior<LifeTraits>{
            [cells](const PerceptionView<LifeTraits>& view, const CellState& st) -> CellPercept {
                const CellGrid& g = view.sigma(cells).grid;
                return CellPercept{static_cast<std::uint8_t>(neighbor_count_xy(g, st.x, st.y)),
                                   g.alive(st.cell)};
            },
            [](const CellState& st, LevelId, LevelId, InfluenceSink<LifeTraits>& sink) {
                sink.emit(decision_cell(st.cell, st.next_alive));
            }}});
    behaviors->memorize = [](CellState&& st, std::span<const LevelPercept<LifeTraits>> percepts)
        -> CellState {
        const CellPercept& p = percepts.front().value;
        st.next_alive = memorization_cell(p.neighbors, p.alive);
        return st;
    };

    const CellGrid& board = sim.level_states[0].sigma.grid;
    sim.agents.reserve(board.size());
    for (std::uint32_t c = 0; c < board.size(); ++c) {
        AgentRecord<LifeTraits> ag;
        ag.id = EntityId::agent(c);
        ag.state = CellState{c, static_cast<std::uint16_t>(c % board.width),
                             static_cast<std::uint16_t>(c / board.width), false};
        ag.behaviors = behaviors;
        sim.agents.push_back(std::move(ag));
    }

    sim.prepare();
    return sim;
}

} // namespace irsim::life
