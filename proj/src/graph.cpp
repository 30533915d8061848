#include "dspodfl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dspodfl/rng.hpp"

namespace dspodfl {

namespace {

void build_adjacency(Topology& t)
{
    t.adjacency.assign(t.m, {});
    for (const auto& [i, j] : t.edges) {
        t.adjacency[i].push_back(j);
        t.adjacency[j].push_back(i);
    }
    for (auto& nbrs : t.adjacency) std::sort(nbrs.begin(), nbrs.end());
}

}  // namespace

bool Topology::has_edge(int i, int j) const
{
    return std::binary_search(adjacency[i].begin(), adjacency[i].end(), j);
}

int Topology::edge_index(int i, int j) const
{
    if (i > j) std::swap(i, j);
    const auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(i, j));
    if (it == edges.end() || *it != std::make_pair(i, j)) return -1;
    return static_cast<int>(it - edges.begin());
}

Topology make_topology(int m, std::vector<std::pair<int, int>> edges)
{
    if (m < 1) throw std::invalid_argument("topology: client count must be >= 1");
    for (auto& [i, j] : edges) {
        if (i == j) throw std::invalid_argument("topology: self-loop rejected");
        if (i > j) std::swap(i, j);
        if (i < 0 || j >= m) throw std::invalid_argument("topology: endpoint out of range");
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    Topology t;
    t.m = m;
    t.edges = std::move(edges);
    build_adjacency(t);
    return t;
}

Topology generate_rgg(int m, double radius, uint64_t seed)
{
    if (m < 1) throw std::invalid_argument("generate_rgg: client count must be >= 1");
    if (radius <= 0.0) throw std::invalid_argument("generate_rgg: radius must be positive");

    Topology t;
    t.m = m;
    t.radius = radius;
    t.seed = seed;
    t.has_coordinates = true;
    t.coordinates.resize(m);
    for (int i = 0; i < m; ++i) {
        t.coordinates[i][0] = rng::uniform01(seed, rng::Stream::Coordinates, 0, i, 0);
        t.coordinates[i][1] = rng::uniform01(seed, rng::Stream::Coordinates, 0, i, 1);
    }
    const double r2 = radius * radius;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const double dx = t.coordinates[i][0] - t.coordinates[j][0];
            const double dy = t.coordinates[i][1] - t.coordinates[j][1];
            if (dx * dx + dy * dy <= r2) t.edges.emplace_back(i, j);
        }
    }
    build_adjacency(t);
    return t;
}

bool is_connected(const Topology& t)
{
    if (t.m <= 1) return true;
    std::vector<char> seen(t.m, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : t.adjacency[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == t.m;
}

Topology regenerate_connected_rgg(int m, double radius, uint64_t seed,
                                  int max_attempts, int* attempts_out)
{
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Topology t = generate_rgg(m, radius, rng::subseed(seed, attempt));
        if (is_connected(t)) {
            t.seed = seed;  // record the user-facing seed for reproduction
            if (attempts_out) *attempts_out = attempt + 1;
            return t;
        }
    }
    throw std::runtime_error("regenerate_connected_rgg: no connected draw after "
                             + std::to_string(max_attempts) + " attempts (m="
                             + std::to_string(m) + ", radius=" + std::to_string(radius) + ")");
}

std::vector<int> neighbors(const Topology& t, int i)
{
    if (i < 0 || i >= t.m) throw std::out_of_range("neighbors: client id out of range");
    return t.adjacency[i];
}

TopologySchedule::TopologySchedule(Topology base, Mode mode, int max_attempts)
    : base_(std::move(base)), mode_(mode), max_attempts_(max_attempts)
{
    current_ = base_;
    union_edges_.insert(base_.edges.begin(), base_.edges.end());
}

const Topology& TopologySchedule::at_iteration(uint64_t k)
{
    if (mode_ == Mode::Static) return base_;
    const uint64_t sub = rng::word(base_.seed, rng::Stream::SubSeed, k, 0x7030);
    current_ = regenerate_connected_rgg(base_.m, base_.radius, sub, max_attempts_);
    union_edges_.insert(current_.edges.begin(), current_.edges.end());
    return current_;
}

nlohmann::json topology_to_json(const Topology& t)
{
    nlohmann::json j;
    j["m"] = t.m;
    j["radius"] = t.radius;
    j["seed"] = t.seed;
    if (t.has_coordinates) {
        auto coords = nlohmann::json::array();
        for (const auto& c : t.coordinates) coords.push_back({c[0], c[1]});
        j["coordinates"] = coords;
    }
    auto edges = nlohmann::json::array();
    for (const auto& [a, b] : t.edges) edges.push_back({a + 1, b + 1});
    j["edges"] = edges;
    return j;
}

Topology topology_from_json(const nlohmann::json& j)
{
    const int m = j.at("m").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges"))
        edges.emplace_back(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1);
    Topology t = make_topology(m, std::move(edges));
    t.radius = j.value("radius", 0.0);
    t.seed = j.value("seed", 0ull);
    if (j.contains("coordinates")) {
        t.has_coordinates = true;
        t.coordinates.clear();
        for (const auto& c : j.at("coordinates"))
            t.coordinates.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    }
    return t;
}

}  // namespace dspodfl
