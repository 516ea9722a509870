#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "irsim/errors.hpp"

namespace irsim {

/// Opaque handle of a level inside one simulation.
struct LevelId {
    static constexpr std::uint32_t npos = 0xFFFFFFFFu;

    std::uint32_t index = npos;

    bool valid() const { return index != npos; }
    auto operator<=>(const LevelId&) const = default;
};

/// The two inter-level relations: producing influences into another level,
/// and perceiving another level's dynamic state.
enum class Relation { influence, perception };

/// The level set with its influence and perception digraphs. Relations of a
/// level with itself are systematic and never stored as edges; neighborhood
/// queries add the level itself.
class LevelGraph {
public:
    LevelId add_level(std::string name = "") {
        if (name.empty()) name = "level" + std::to_string(names_.size());
        names_.push_back(std::move(name));
        out_[0].emplace_back();
        out_[1].emplace_back();
        in_[0].emplace_back();
        in_[1].emplace_back();
        return LevelId{static_cast<std::uint32_t>(names_.size() - 1)};
    }

    void add_edge(Relation rel, LevelId from, LevelId to) {
        require(from, "add_edge");
        require(to, "add_edge");
        if (from == to)
            throw ConfigError("level graph: relations within a level are implicit, "
                              "self-edge on '" + names_[from.index] + "' rejected");
        auto& fwd = out_[slot(rel)][from.index];
        if (std::find(fwd.begin(), fwd.end(), to) != fwd.end()) return;
        fwd.push_back(to);
        in_[slot(rel)][to.index].push_back(from);
    }

    std::size_t level_count() const { return names_.size(); }

    bool contains(LevelId l) const { return l.valid() && l.index < names_.size(); }

    const std::string& name(LevelId l) const {
        require(l, "name");
        return names_[l.index];
    }

    bool has_edge(Relation rel, LevelId from, LevelId to) const {
        require(from, "has_edge");
        require(to, "has_edge");
        const auto& fwd = out_[slot(rel)][from.index];
        return std::find(fwd.begin(), fwd.end(), to) != fwd.end();
    }

    /// N^+(l): the level itself plus the targets of its outgoing edges.
    std::vector<LevelId> out_neighborhood(LevelId l, Relation rel) const {
        require(l, "out_neighborhood");
        return with_self(l, out_[slot(rel)][l.index]);
    }

    /// N^-(l): the level itself plus the sources of its incoming edges.
    std::vector<LevelId> in_neighborhood(LevelId l, Relation rel) const {
        require(l, "in_neighborhood");
        return with_self(l, in_[slot(rel)][l.index]);
    }

private:
    static std::size_t slot(Relation rel) { return rel == Relation::influence ? 0 : 1; }

    void require(LevelId l, const char* op) const {
        if (!contains(l))
            throw ConfigError(std::string("level graph: unknown level id in ") + op);
    }

    static std::vector<LevelId> with_self(LevelId l, const std::vector<LevelId>& adj) {
        std::vector<LevelId> out;
        out.reserve(adj.size() + 1);
        out.push_back(l);
        out.insert(out.end(), adj.begin(), adj.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::vector<std::string> names_;
    // adjacency per relation slot: [0]=influence, [1]=perception
    std::vector<std::vector<LevelId>> out_[2];
    std::vector<std::vector<LevelId>> in_[2];
};

inline std::vector<LevelId> out_neighborhood(const LevelGraph& g, LevelId l, Relation rel) {
    return g.out_neighborhood(l, rel);
}

inline std::vector<LevelId> in_neighborhood(const LevelGraph& g, LevelId l, Relation rel) {
    return g.in_neighborhood(l, rel);
}

} // namespace irsim
