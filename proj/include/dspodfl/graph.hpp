#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace dspodfl {

// Undirected communication topology over clients 0..m-1. Edges are stored
// once with first < second; no self-loops. Immutable after construction.
struct Topology {
    int m = 0;
    double radius = 0.0;               // 0 when not geometric
    uint64_t seed = 0;
    bool has_coordinates = false;
    std::vector<std::array<double, 2>> coordinates;  // unit square
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adjacency;         // sorted neighbor lists

    int degree(int i) const { return static_cast<int>(adjacency[i].size()); }
    bool has_edge(int i, int j) const;
    int edge_index(int i, int j) const;  // -1 if absent
};

Topology make_topology(int m, std::vector<std::pair<int, int>> edges);

// Clients placed uniformly at random in the unit square; edge (i,j) present
// iff the Euclidean distance is <= radius (ties on the boundary count).
Topology generate_rgg(int m, double radius, uint64_t seed);

bool is_connected(const Topology& t);

// Rejection-samples RGGs with fresh sub-seeds until connected.
Topology regenerate_connected_rgg(int m, double radius, uint64_t seed,
                                  int max_attempts = 1000, int* attempts_out = nullptr);

std::vector<int> neighbors(const Topology& t, int i);

// Per-iteration topology source plus the accumulated union edge set.
class TopologySchedule {
public:
    enum class Mode { Static, Regenerated };

    TopologySchedule(Topology base, Mode mode = Mode::Static, int max_attempts = 1000);

    const Topology& at_iteration(uint64_t k);
    const Topology& base() const { return base_; }
    Mode mode() const { return mode_; }
    const std::set<std::pair<int, int>>& union_edges() const { return union_edges_; }

private:
    Topology base_;
    Topology current_;
    Mode mode_;
    int max_attempts_;
    std::set<std::pair<int, int>> union_edges_;
};

nlohmann::json topology_to_json(const Topology& t);   // 1-based client ids
Topology topology_from_json(const nlohmann::json& j);

}  // namespace dspodfl
