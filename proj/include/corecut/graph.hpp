#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace corecut {

struct WeightedGraph {
    struct Edge {
        int u = 0;
        int v = 0;
        double len = 1.0;
    };
    int n = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<std::pair<int, double>>> adj;
};

// Validates ids, positive lengths, no self-loops, connectivity.
WeightedGraph make_graph(int n_vertices, std::vector<WeightedGraph::Edge> edges);

// Edge-list format: whitespace-separated "u v length" per line (length
// optional, default 1.0), '#' starts a comment, vertices are non-negative
// integers.
WeightedGraph load_graph(const std::string& path);

std::vector<double> dijkstra(const WeightedGraph& g, int src);
std::vector<std::vector<double>> all_pairs_distances(const WeightedGraph& g);

enum class TrafficMode {
    kAnyGeodesic,  // a pair counts if some shortest path passes within r
    kUniqueOnly,   // pairs with non-unique geodesics are excluded entirely
};

const char* traffic_mode_name(TrafficMode mode);
TrafficMode traffic_mode_from_name(const std::string& name);

// D(x,r) over ordered endpoint pairs (|Gamma| = |V|^2, diagonal included).
double traffic_density_vertex(const WeightedGraph& g, int x, double r, TrafficMode mode);

// Four-point condition constant, normalized so trees are exactly 0 and the
// unit 4-cycle is exactly 1/2. Exact O(n^4) scan, guarded at |V| <= 400.
double gromov_delta(const WeightedGraph& g);

// Sampled lower bound for graphs above the exact-scan guard.
double gromov_delta_sampled(const WeightedGraph& g, std::int64_t n_tuples, std::uint64_t seed);

struct GraphTrafficReport {
    TrafficMode mode = TrafficMode::kAnyGeodesic;
    std::vector<double> radii;
    std::vector<double> density0;                // D(x) per vertex
    std::vector<std::vector<double>> density_r;  // [vertex][radius index]
    double delta = -1.0;                         // < 0 when not computed
    int core_vertex = -1;                        // argmax of D(x)
    double core_radius_hint = -1.0;              // 4 * delta
};

GraphTrafficReport core_report(const WeightedGraph& g, const std::vector<double>& radii,
                               TrafficMode mode = TrafficMode::kAnyGeodesic,
                               bool with_delta = true);

nlohmann::json graph_report_json(const GraphTrafficReport& rep, const WeightedGraph& g);
std::string graph_report_csv(const GraphTrafficReport& rep);

}  // namespace corecut
