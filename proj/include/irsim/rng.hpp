#pragma once

#include <cstdint>

#include "irsim/time.hpp"

namespace irsim {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

/// SplitMix64 finalizer (Vigna). Bijective, strong avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Fold one key word into a derivation state.
constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
    return mix64((h + kGolden) ^ v);
}

/// Counter-based random stream: the state walks a Weyl sequence and every
/// output is the mixed counter, so draws depend only on (key, draw index).
/// Streams with distinct keys are independent for simulation purposes.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    /// Uniform draw in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_ = 0;
};

/// Stream derivation key: one independent stream per
/// (replication, level, tick, entity) tuple under a root seed.
struct StreamKey {
    std::uint64_t replication = 0;
    std::uint64_t level = 0;
    std::uint64_t tick = 0;
    std::uint64_t entity = 0;
};

/// Pseudo-level used to key draws that happen before the simulation exists
/// (grid initialization), so they never collide with reaction streams.
inline constexpr std::uint64_t kInitLevelKey = ~0ull;

inline RngStream derive_stream(std::uint64_t root, const StreamKey& key) {
    std::uint64_t h = absorb(root, key.replication);
    h = absorb(h, key.level);
    h = absorb(h, key.tick);
    return RngStream(absorb(h, key.entity));
}

/// All per-entity streams of one (replication, level, tick). Reactions use
/// this to hand every cell or region its own stream without re-deriving the
/// shared prefix; results are identical to derive_stream with the full key.
class StreamFamily {
public:
    StreamFamily(std::uint64_t root, std::uint64_t replication, std::uint64_t level, Tick tick)
        : base_(absorb(absorb(absorb(root, replication), level), tick)) {}

    RngStream stream(std::uint64_t entity) const { return RngStream(absorb(base_, entity)); }

    /// First uniform draw of the entity's stream.
    double unit(std::uint64_t entity) const { return stream(entity).next_unit(); }

private:
    std::uint64_t base_;
};

} // namespace irsim
