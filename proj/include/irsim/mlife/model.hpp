#pragma once

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "irsim/life/grid.hpp"
#include "irsim/life/model.hpp"
#include "irsim/mlife/partition.hpp"
#include "irsim/mlife/reaction.hpp"
#include "irsim/rng.hpp"
#include "irsim/scheduler.hpp"
#include "irsim/simulation.hpp"

namespace irsim::mlife {

/// Cell-level properties: the board plus the last reaction's control
/// statistics.
struct MicroSigma {
    life::CellGrid grid;
    std::uint32_t rejected_last = 0;
    std::uint32_t dying_last = 0;
};

/// Region-level properties: the target density and the cells of each region.
struct MesoSigma {
    ControlParams control;
    std::shared_ptr<const RegionPartition> partition;
};

/// Controller memory: which region, and the last error signal.
struct MesoState {
    std::uint32_t region = 0;
    double epsilon = 0.0;
};

struct MLifeTraits {
    using Sigma = std::variant<MicroSigma, MesoSigma>;
    using Payload = std::variant<life::CellInfluence, CellCommand>;
    using AgentState = std::variant<life::CellState, MesoState>;
    using Percept = std::variant<life::CellPercept, double>;
};

using MLifeSimulation = Simulation<MLifeTraits>;

inline constexpr LevelId kMicroLevel{0};
inline constexpr LevelId kMesoLevel{1};

inline const life::CellGrid& current_grid(const MLifeSimulation& sim) {
    return std::get<MicroSigma>(sim.level_states[kMicroLevel.index].sigma).grid;
}

inline std::uint32_t rejected_last(const MLifeSimulation& sim) {
    return std::get<MicroSigma>(sim.level_states[kMicroLevel.index].sigma).rejected_last;
}

inline std::uint32_t dying_last(const MLifeSimulation& sim) {
    return std::get<MicroSigma>(sim.level_states[kMicroLevel.index].sigma).dying_last;
}

/// Wires the two-level model: cell agents play plain Life in the micro
/// level, one controller agent per region observes micro densities from the
/// meso level and commands the micro reaction. Perception and influence
/// edges both run meso -> micro.
inline MLifeSimulation build_mlife_simulation(life::CellGrid grid, RegionPartition partition,
                                              ControlParams control, Tick meso_dt = 1,
                                              life::StreamContext rng = {}) {
    if (grid.width == 0 || grid.height == 0) throw ConfigError("mlife: zero-size grid");
    if (partition.grid_width != grid.width || partition.grid_height != grid.height)
        throw ConfigError("mlife: partition does not tile this grid");
    if (!(control.rho_plus > 0.0 && control.rho_plus < 1.0))
        throw ConfigError("mlife: target density must be in (0, 1)");
    if (control.k_p < 0.0) throw ConfigError("mlife: gain must be non-negative");
    if (meso_dt < 1) throw ConfigError("mlife: meso period must be >= 1");

    auto shared_partition = std::make_shared<const RegionPartition>(std::move(partition));

    MLifeSimulation sim;
    const LevelId micro = sim.graph.add_level("cells");
    const LevelId meso = sim.graph.add_level("regions");
    sim.graph.add_edge(Relation::perception, meso, micro);
    sim.graph.add_edge(Relation::influence, meso, micro);

    const std::uint32_t width = grid.width;
    const std::size_t cell_count = grid.size();

    sim.level_states.push_back(
        LevelState<MLifeTraits>{MicroSigma{std::move(grid)}, {}, SimTime{0, 1}});
    sim.level_states.push_back(
        LevelState<MLifeTraits>{MesoSigma{control, shared_partition}, {}, SimTime{0, meso_dt}});

    const std::uint64_t root = rng.root;
    const std::uint64_t rep = rng.replication;
    sim.level_specs.push_back(LevelSpec<MLifeTraits>{
        micro,
        [root, rep, cell_count](typename MLifeTraits::Sigma&& sigma,
                                std::span<const Influence<MLifeTraits>> influences,
                                SimTime now) -> ReactionResult<MLifeTraits> {
            auto& micro_sigma = std::get<MicroSigma>(sigma);
            std::vector<life::CellInfluence> per_cell;
            per_cell.reserve(cell_count);
            std::vector<double> commands(cell_count, 0.0);
            for (const auto& inf : influences) {
                if (const auto* ci = std::get_if<life::CellInfluence>(&inf.payload)) {
                    per_cell.push_back(*ci);
                } else {
                    const auto& cmd = std::get<CellCommand>(inf.payload);
                    if (cmd.cell >= commands.size())
                        throw ModelError("mlife: command for a cell outside the grid");
                    commands[cmd.cell] = cmd.command;
                }
            }
            StreamFamily draws(root, rep, kMicroLevel.index, now.t);
            ControlledOutcome out =
                reaction_micro_controlled(micro_sigma.grid, per_cell, commands, draws);
            return ReactionResult<MLifeTraits>{
                MicroSigma{std::move(out.grid), out.rejected, out.dying}, {}, now.advanced(1)};
        }});
    sim.level_specs.push_back(LevelSpec<MLifeTraits>{
        meso,
        [meso_dt](typename MLifeTraits::Sigma&& sigma, std::span<const Influence<MLifeTraits>>,
                  SimTime now) -> ReactionResult<MLifeTraits> {
            // target density and partition are static; only time advances
            return ReactionResult<MLifeTraits>{std::move(sigma), {}, now.advanced(meso_dt)};
        }});

    auto cell_behaviors = std::make_shared<AgentBehaviors<MLifeTraits>>();
    cell_behaviors->levels.push_back({micro,
        LevelBehavior<MLifeTraits>{
            [micro](const PerceptionView<MLifeTraits>& view,
                    const typename MLifeTraits::AgentState& state) -> typename MLifeTraits::Percept {
                const auto& st = std::get<life::CellState>(state);
                const life::CellGrid& g = std::get<MicroSigma>(view.sigma(micro)).grid;
                return life::CellPercept{
                    static_cast<std::uint8_t>(life::neighbor_count_xy(g, st.x, st.y)),
                    g.alive(st.cell)};
            },
            [](const typename MLifeTraits::AgentState& state, LevelId, LevelId,
               InfluenceSink<MLifeTraits>& sink) {
                const auto& st = std::get<life::CellState>(state);
                sink.emit(life::decision_cell(st.cell, st.next_alive));
            }}});
    cell_behaviors->memorize = [](typename MLifeTraits::AgentState&& state,
                                  std::span<const LevelPercept<MLifeTraits>> percepts)
        -> typename MLifeTraits::AgentState {
        auto& st = std::get<life::CellState>(state);
        const auto& p = std::get<life::CellPercept>(percepts.front().value);
        st.next_alive = life::memorization_cell(p.neighbors, p.alive);
        return state;
    };

    // rho_plus and k_p are read as configuration by the controller behaviors
    const double rho_plus = control.rho_plus;
    const double k_p = control.k_p;
    auto meso_behaviors = std::make_shared<AgentBehaviors<MLifeTraits>>();
    meso_behaviors->levels.push_back({meso,
        LevelBehavior<MLifeTraits>{
            [micro, part = shared_partition](const PerceptionView<MLifeTraits>& view,
                                             const typename MLifeTraits::AgentState& state)
                -> typename MLifeTraits::Percept {
                const auto& st = std::get<MesoState>(state);
                const life::CellGrid& g = std::get<MicroSigma>(view.sigma(micro)).grid;
                return perception_meso(g, part->regions[st.region]);
            },
            [micro, k_p, part = shared_partition](const typename MLifeTraits::AgentState& state,
                                                  LevelId, LevelId target,
                                                  InfluenceSink<MLifeTraits>& sink) {
                if (target != micro) return;
                const auto& st = std::get<MesoState>(state);
                const double command = k_p * st.epsilon;
                for (std::uint32_t c : part->regions[st.region])
                    sink.emit(CellCommand{c, command});
            }}});
    meso_behaviors->memorize = [rho_plus](typename MLifeTraits::AgentState&& state,
                                          std::span<const LevelPercept<MLifeTraits>> percepts)
        -> typename MLifeTraits::AgentState {
        auto& st = std::get<MesoState>(state);
        st.epsilon = memorization_meso(std::get<double>(percepts.front().value), rho_plus);
        return state;
    };

    sim.agents.reserve(cell_count + shared_partition->region_count());
    for (std::uint32_t c = 0; c < cell_count; ++c) {
        AgentRecord<MLifeTraits> ag;
        ag.id = EntityId::agent(c);
        ag.state = life::CellState{c, static_cast<std::uint16_t>(c % width),
                                   static_cast<std::uint16_t>(c / width), false};
        ag.behaviors = cell_behaviors;
        sim.agents.push_back(std::move(ag));
    }
    for (std::uint32_t r = 0; r < shared_partition->region_count(); ++r) {
        AgentRecord<MLifeTraits> ag;
        ag.id = EntityId::agent(cell_count + r);
        ag.state = MesoState{r, 0.0};
        ag.behaviors = meso_behaviors;
        sim.agents.push_back(std::move(ag));
    }

    sim.prepare();
    return sim;
}

} // namespace irsim::mlife
