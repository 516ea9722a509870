#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "irsim/errors.hpp"
#include "irsim/level_graph.hpp"
#include "irsim/time.hpp"

namespace irsim {

/// Identifies the producer of an influence: an agent or an environment.
struct EntityId {
    static constexpr std::uint64_t env_flag = 1ull << 63;

    std::uint64_t raw = 0;

    static EntityId agent(std::uint64_t v) { return EntityId{v}; }
    static EntityId environment(std::uint64_t v) { return EntityId{v | env_flag}; }

    bool is_environment() const { return (raw & env_flag) != 0; }
    std::uint64_t value() const { return raw & ~env_flag; }
    auto operator<=>(const EntityId&) const = default;
};

/// An intention produced in `origin` and addressed to `target`. The payload
/// is model-defined; the kernel only routes it.
template <class M>
struct Influence {
    EntityId source;
    LevelId origin;
    LevelId target;
    typename M::Payload payload;
};

/// A level's dynamic state: environmental properties, persistent influences
/// retained by the last reaction, and the level clock.
template <class M>
struct LevelState {
    typename M::Sigma sigma{};
    std::vector<Influence<M>> gamma;
    SimTime time{};
};

template <class M>
struct LevelPercept {
    LevelId level;
    typename M::Percept value;
};

template <class M>
struct Simulation;

/// Read access to the dynamic states an agent may perceive from a level:
/// the level itself plus its perception successors.
template <class M>
class PerceptionView {
public:
    PerceptionView(const Simulation<M>& sim, std::span<const LevelId> visible)
        : sim_(&sim), visible_(visible) {}

    std::span<const LevelId> levels() const { return visible_; }

    const typename M::Sigma& sigma(LevelId l) const { return state(l).sigma; }
    const std::vector<Influence<M>>& influences(LevelId l) const { return state(l).gamma; }
    SimTime time(LevelId l) const { return state(l).time; }

private:
    const LevelState<M>& state(LevelId l) const {
        for (LevelId v : visible_)
            if (v == l) return sim_->level_states[l.index];
        throw ModelError("perception view: level '" + sim_->graph.name(l) +
                         "' is not perceivable from here");
    }

    const Simulation<M>* sim_;
    std::span<const LevelId> visible_;
};

/// Collects the payloads one producer emits toward one target level.
template <class M>
class InfluenceSink {
public:
    InfluenceSink(std::vector<Influence<M>>& out, EntityId source, LevelId origin, LevelId target)
        : out_(&out), source_(source), origin_(origin), target_(target) {}

    void emit(typename M::Payload payload) {
        out_->push_back(Influence<M>{source_, origin_, target_, std::move(payload)});
        ++count_;
    }

    std::uint32_t count() const { return count_; }

private:
    std::vector<Influence<M>>* out_;
    EntityId source_;
    LevelId origin_;
    LevelId target_;
    std::uint32_t count_ = 0;
};

/// An agent's per-level behavior: how it perceives the levels visible from
/// there and which influences it decides to produce.
template <class M>
struct LevelBehavior {
    std::function<typename M::Percept(const PerceptionView<M>&, const typename M::AgentState&)> perceive;
    std::function<void(const typename M::AgentState&, LevelId origin, LevelId target, InfluenceSink<M>&)> decide;
};

/// The behavior bundle shared by agents of one kind. Memorization is a
/// property of the agent, not of a level: there is exactly one, and it
/// consumes all percepts collected in an iteration at once.
template <class M>
struct AgentBehaviors {
    std::vector<std::pair<LevelId, LevelBehavior<M>>> levels;
    std::function<typename M::AgentState(typename M::AgentState&&, std::span<const LevelPercept<M>>)> memorize;
};

/// An agent: identity, internal state, and the levels it belongs to.
/// Membership is exactly the key set of the behavior bundle.
template <class M>
struct AgentRecord {
    EntityId id{};
    typename M::AgentState state{};
    std::shared_ptr<const AgentBehaviors<M>> behaviors;

    // percepts collected this iteration, consumed by memorize
    std::vector<LevelPercept<M>> collected;
};

template <class M>
using NaturalFn =
    std::function<void(const LevelState<M>&, LevelId origin, LevelId target, InfluenceSink<M>&)>;

/// An environment produces a level's natural dynamics. One environment may
/// serve several levels.
template <class M>
struct EnvironmentRecord {
    EntityId id{};
    std::vector<std::pair<LevelId, NaturalFn<M>>> naturals;
};

template <class M>
struct ReactionResult {
    typename M::Sigma sigma;
    std::vector<Influence<M>> retained; // next persistent set, targets must be this level
    SimTime time;                       // must equal {t + dt, new dt >= 1}
};

/// Per-level reaction: consumes the aggregated influences and computes the
/// next state and clock of the level.
template <class M>
struct LevelSpec {
    LevelId id{};
    std::function<ReactionResult<M>(typename M::Sigma&&, std::span<const Influence<M>>, SimTime)> reaction;
};

/// One producer's emission toward a target level. Re-emission by the same
/// producer while the target has not reacted replaces the previous batch
/// (phase 2 assigns per-producer slots, it does not accumulate them).
struct PendingBatch {
    EntityId source;
    LevelId origin;
    std::uint64_t iteration = 0;
    std::uint32_t offset = 0;
    std::uint32_t count = 0;
    bool dead = false;
};

template <class M>
struct PendingLevel {
    std::vector<Influence<M>> data;
    std::vector<PendingBatch> batches;
    // batches before this index predate the current iteration; only they are
    // candidates for replacement, batches behind it are this iteration's
    std::uint32_t stale_end = 0;
    std::uint64_t stale_marker = 0; // iteration stale_end was computed for
    bool any_dead = false;

    bool fully_live() const { return !any_dead; }

    std::uint64_t live_count() const {
        std::uint64_t n = 0;
        for (const auto& b : batches)
            if (!b.dead) n += b.count;
        return n;
    }

    void clear() {
        data.clear();
        batches.clear();
        stale_end = 0;
        stale_marker = 0;
        any_dead = false;
    }
};

/// Influence bookkeeping across the run; at any point
/// produced == consumed + overwritten + still pending.
struct InfluenceCounters {
    std::uint64_t produced = 0;
    std::uint64_t consumed = 0;
    std::uint64_t overwritten = 0;
};

struct ReactionEvent {
    std::uint64_t iteration = 0;
    LevelId level;
    Tick event_time = 0; // t the reaction consumed
    Tick new_time = 0;   // t it advanced to (= event_time + dt)
};

struct GuardSample {
    std::uint64_t iteration = 0;
    LevelId level;
    bool perceive_ok = false;
    bool emit_ok = false;
    std::vector<LevelId> targets;
};

/// Optional recorder for scheduler conformance tests.
struct StepTrace {
    std::vector<ReactionEvent> reactions;
    std::vector<GuardSample> guards;
};

template <class M>
struct Simulation {
    LevelGraph graph;
    std::vector<LevelState<M>> level_states; // by level index
    std::vector<LevelSpec<M>> level_specs;   // by level index
    std::vector<AgentRecord<M>> agents;      // iteration order is insertion order
    std::vector<EnvironmentRecord<M>> environments;
    Tick t_final = 0;

    std::vector<PendingLevel<M>> pending; // by target level index
    std::uint64_t iteration = 0;
    InfluenceCounters counters;
    StepTrace* trace = nullptr;

    // derived at prepare(): (agent index, behavior slot) per level
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> members;
    // cached neighborhoods, self included
    std::vector<std::vector<LevelId>> out_perception;
    std::vector<std::vector<LevelId>> out_influence;
    std::vector<std::vector<LevelId>> in_influence;
    bool prepared = false;

    std::uint64_t pending_live() const {
        std::uint64_t n = 0;
        for (const auto& p : pending) n += p.live_count();
        return n;
    }

    /// Validates the wiring and builds the derived indexes. Must be called
    /// once after construction; model builders do this for you.
    void prepare() {
        const std::size_t n = graph.level_count();
        if (n == 0) throw ConfigError("simulation: empty level set");
        if (level_states.size() != n || level_specs.size() != n)
            throw ConfigError("simulation: need one state and one spec per level");

        for (std::size_t i = 0; i < n; ++i) {
            if (level_specs[i].id.index != i)
                throw ConfigError("simulation: level spec order does not match the level set");
            if (level_states[i].time.dt < 1)
                throw ConfigError("simulation: level '" + graph.name(LevelId{(std::uint32_t)i}) +
                                  "' has dt < 1");
            for (const auto& inf : level_states[i].gamma)
                if (inf.target.index != i)
                    throw ConfigError("simulation: persistent influence with foreign target in level '" +
                                      graph.name(LevelId{(std::uint32_t)i}) + "'");
        }

        std::unordered_set<std::uint64_t> seen_ids;
        for (const auto& ag : agents) {
            if (!ag.behaviors)
                throw ConfigError("simulation: agent without behavior bundle");
            if (!seen_ids.insert(ag.id.raw).second)
                throw ConfigError("simulation: duplicate agent id");
            for (const auto& [lvl, beh] : ag.behaviors->levels)
                if (!graph.contains(lvl))
                    throw ConfigError("simulation: agent behavior references an unknown level");
        }
        for (const auto& env : environments)
            for (const auto& [lvl, fn] : env.naturals)
                if (!graph.contains(lvl))
                    throw ConfigError("simulation: environment references an unknown level");

        members.assign(n, {});
        for (std::uint32_t ai = 0; ai < agents.size(); ++ai) {
            const auto& levels = agents[ai].behaviors->levels;
            for (std::uint32_t slot = 0; slot < levels.size(); ++slot)
                members[levels[slot].first.index].emplace_back(ai, slot);
        }

        out_perception.resize(n);
        out_influence.resize(n);
        in_influence.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const LevelId l{i};
            out_perception[i] = graph.out_neighborhood(l, Relation::perception);
            out_influence[i] = graph.out_neighborhood(l, Relation::influence);
            in_influence[i] = graph.in_neighborhood(l, Relation::influence);
        }

        pending.assign(n, {});
        prepared = true;
    }

    void require_prepared() const {
        if (!prepared)
            throw ConfigError("simulation: prepare() was not called");
    }
};

} // namespace irsim
