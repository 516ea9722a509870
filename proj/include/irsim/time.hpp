#pragma once

#include <cstdint>

namespace irsim {

/// Simulation time is integer ticks. Guards compare event times for equality
/// and ordering, so a discrete time base keeps them exact.
using Tick = std::uint64_t;

/// A level's clock: the current event time `t` and its lifespan `dt`.
/// The level's next reaction happens at `t + dt`.
struct SimTime {
    Tick t = 0;
    Tick dt = 1;

    Tick next() const { return t + dt; }

    /// Canonical advance performed by a reaction: the new event time is the
    /// old `t + dt`, with a freshly chosen lifespan.
    SimTime advanced(Tick new_dt) const { return SimTime{t + dt, new_dt}; }

    bool operator==(const SimTime&) const = default;
};

} // namespace irsim
