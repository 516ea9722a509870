#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "irsim/simulation.hpp"

namespace irsim {

/// A level may perceive when its clock is at or ahead of every level it
/// perceives: for all l_P in N_P^+(l), t(l) >= t(l_P).
template <class M>
bool can_perceive(const Simulation<M>& sim, LevelId l) {
    sim.require_prepared();
    if (!sim.graph.contains(l)) throw ConfigError("can_perceive: unknown level id");
    const Tick t = sim.level_states[l.index].time.t;
    for (LevelId lp : sim.out_perception[l.index])
        if (t < sim.level_states[lp.index].time.t) return false;
    return true;
}

/// A level may emit when, for every influenceable level l_I,
/// t(l) <= t(l_I)  or  t(l) + dt(l) < t(l_I) + dt(l_I).
template <class M>
bool can_emit_influences(const Simulation<M>& sim, LevelId l) {
    sim.require_prepared();
    if (!sim.graph.contains(l)) throw ConfigError("can_emit_influences: unknown level id");
    const SimTime mine = sim.level_states[l.index].time;
    for (LevelId li : sim.out_influence[l.index]) {
        const SimTime theirs = sim.level_states[li.index].time;
        if (!(mine.t <= theirs.t || mine.next() < theirs.next())) return false;
    }
    return true;
}

/// The influenceable levels whose current event falls inside l's current
/// span: t(l) <= t(l_I) and t(l) + dt(l) > t(l_I).
template <class M>
std::vector<LevelId> influence_targets(const Simulation<M>& sim, LevelId l) {
    sim.require_prepared();
    if (!sim.graph.contains(l)) throw ConfigError("influence_targets: unknown level id");
    const SimTime mine = sim.level_states[l.index].time;
    std::vector<LevelId> out;
    for (LevelId li : sim.out_influence[l.index]) {
        const Tick their_t = sim.level_states[li.index].time.t;
        if (mine.t <= their_t && mine.next() > their_t) out.push_back(li);
    }
    return out;
}

/// Earliest pending reaction over all levels: min of t + dt.
template <class M>
Tick next_reaction_time(const Simulation<M>& sim) {
    sim.require_prepared();
    Tick best = std::numeric_limits<Tick>::max();
    for (const auto& st : sim.level_states) best = std::min(best, st.time.next());
    return best;
}

/// The levels reacting this iteration: all whose t + dt equals the minimum.
template <class M>
std::vector<LevelId> reaction_set(const Simulation<M>& sim) {
    sim.require_prepared();
    if (sim.level_states.empty()) throw ConfigError("reaction_set: empty level set");
    const Tick best = next_reaction_time(sim);
    std::vector<LevelId> out;
    for (std::uint32_t i = 0; i < sim.level_states.size(); ++i)
        if (sim.level_states[i].time.next() == best) out.push_back(LevelId{i});
    return out;
}

/// Everything level l's next reaction consumes: its persistent influences
/// plus all live pending influences addressed to it.
template <class M>
std::vector<Influence<M>> aggregate_influences(const Simulation<M>& sim, LevelId l) {
    sim.require_prepared();
    if (!sim.graph.contains(l)) throw ConfigError("aggregate_influences: unknown level id");
    const auto& st = sim.level_states[l.index];
    const auto& pend = sim.pending[l.index];
    std::vector<Influence<M>> out;
    out.reserve(st.gamma.size() + pend.data.size());
    out.insert(out.end(), st.gamma.begin(), st.gamma.end());
    for (const auto& b : pend.batches) {
        if (b.dead) continue;
        out.insert(out.end(), pend.data.begin() + b.offset, pend.data.begin() + b.offset + b.count);
    }
    return out;
}

namespace detail {

/// Phase-2 emissions are per-producer slots: a fresh emission toward a
/// target that has not reacted yet replaces the producer's previous batch.
/// Earlier iterations' batches form a prefix of the batch list, so only that
/// prefix is scanned.
template <class M>
void tombstone_previous(Simulation<M>& sim, PendingLevel<M>& pend, EntityId source, LevelId origin) {
    if (pend.stale_marker != sim.iteration) {
        pend.stale_marker = sim.iteration;
        pend.stale_end = static_cast<std::uint32_t>(pend.batches.size());
    }
    for (std::uint32_t i = 0; i < pend.stale_end; ++i) {
        auto& b = pend.batches[i];
        if (b.dead) continue;
        if (b.source == source && b.origin == origin) {
            b.dead = true;
            pend.any_dead = true;
            sim.counters.overwritten += b.count;
        }
    }
}

template <class M, class Producer>
void emit_batch(Simulation<M>& sim, LevelId origin, LevelId target, EntityId source, Producer&& produce) {
    auto& pend = sim.pending[target.index];
    tombstone_previous(sim, pend, source, origin);
    const auto offset = static_cast<std::uint32_t>(pend.data.size());
    InfluenceSink<M> sink(pend.data, source, origin, target);
    produce(sink);
    if (sink.count() > 0) {
        pend.batches.push_back(PendingBatch{source, origin, sim.iteration, offset, sink.count(), false});
        sim.counters.produced += sink.count();
    }
}

} // namespace detail

/// One outer iteration: perception and memorization, influence production,
/// then reaction of the earliest levels. Phase order is strict.
template <class M>
void step(Simulation<M>& sim) {
    sim.require_prepared();
    ++sim.iteration;
    const std::size_t n = sim.graph.level_count();

    // Guards depend only on level clocks; evaluate once per iteration.
    std::vector<char> perceive_ok(n), emit_ok(n);
    std::vector<std::vector<LevelId>> targets(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const LevelId l{i};
        perceive_ok[i] = can_perceive(sim, l);
        emit_ok[i] = can_emit_influences(sim, l);
        if (emit_ok[i]) targets[i] = influence_targets(sim, l);
        if (sim.trace)
            sim.trace->guards.push_back(
                GuardSample{sim.iteration, l, perceive_ok[i] != 0, emit_ok[i] != 0, targets[i]});
    }

    // Phase 1: perception per (agent, level) passing the guard, then one
    // memorization per agent that collected at least one percept.
    for (auto& ag : sim.agents) {
        ag.collected.clear();
        const auto& levels = ag.behaviors->levels;
        for (const auto& [lvl, beh] : levels) {
            if (!perceive_ok[lvl.index]) continue;
            PerceptionView<M> view(sim, sim.out_perception[lvl.index]);
            ag.collected.push_back(LevelPercept<M>{lvl, beh.perceive(view, ag.state)});
        }
        if (!ag.collected.empty())
            ag.state = ag.behaviors->memorize(std::move(ag.state),
                                              std::span<const LevelPercept<M>>(ag.collected));
    }

    // Phase 2: natural dynamics and agent decisions of each emitting level,
    // routed into every target the level's current span covers.
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!emit_ok[i]) continue;
        const LevelId origin{i};
        for (LevelId target : targets[i]) {
            for (auto& env : sim.environments) {
                for (auto& [lvl, natural] : env.naturals) {
                    if (lvl != origin) continue;
                    detail::emit_batch(sim, origin, target, env.id, [&](InfluenceSink<M>& sink) {
                        natural(sim.level_states[i], origin, target, sink);
                    });
                }
            }
            for (auto [ai, slot] : sim.members[i]) {
                auto& ag = sim.agents[ai];
                const auto& beh = ag.behaviors->levels[slot].second;
                detail::emit_batch(sim, origin, target, ag.id, [&](InfluenceSink<M>& sink) {
                    beh.decide(ag.state, origin, target, sink);
                });
            }
        }
    }

    // Phase 3: the earliest levels react and consume their pending set.
    for (LevelId l : reaction_set(sim)) {
        auto& st = sim.level_states[l.index];
        auto& pend = sim.pending[l.index];
        const SimTime before = st.time;

        std::span<const Influence<M>> agg;
        std::vector<Influence<M>> merged;
        if (st.gamma.empty() && pend.fully_live()) {
            agg = std::span<const Influence<M>>(pend.data);
        } else {
            merged = aggregate_influences(sim, l);
            agg = merged;
        }

        ReactionResult<M> res = sim.level_specs[l.index].reaction(std::move(st.sigma), agg, before);
        if (res.time.dt < 1)
            throw ModelError("reaction of level '" + sim.graph.name(l) +
                             "' returned dt < 1, time would stall");
        if (res.time.t != before.next())
            throw ModelError("reaction of level '" + sim.graph.name(l) +
                             "' must advance t to exactly t + dt");
        for (const auto& inf : res.retained)
            if (inf.target != l)
                throw ModelError("reaction of level '" + sim.graph.name(l) +
                                 "' retained an influence for another level");

        st.sigma = std::move(res.sigma);
        st.gamma = std::move(res.retained);
        st.time = res.time;
        sim.counters.consumed += pend.live_count();
        pend.clear();
        if (sim.trace)
            sim.trace->reactions.push_back(ReactionEvent{sim.iteration, l, before.t, st.time.t});
    }
}

/// Runs the scheduler until no level may still react within the horizon: a
/// reaction is performed iff the state it produces is indexed at most
/// t_final + 1. Returns the final level states.
template <class M>
const std::vector<LevelState<M>>& run(Simulation<M>& sim, Tick t_final) {
    sim.require_prepared();
    // next_reaction_time >= 1 because dt >= 1, so the subtraction is safe.
    while (next_reaction_time(sim) - 1 <= t_final) step(sim);
    return sim.level_states;
}

template <class M>
const std::vector<LevelState<M>>& run(Simulation<M>& sim) {
    return run(sim, sim.t_final);
}

} // namespace irsim
