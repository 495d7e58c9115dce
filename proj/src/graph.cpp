#include "corecut/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "corecut/errors.hpp"
#include "corecut/rng.hpp"

namespace corecut {

namespace {

constexpr double kEps = 1e-9;

// Per-source geodesic multiplicity, saturated at 2 (only "unique or not" is
// ever needed).
std::vector<int> path_counts(const WeightedGraph& g, int src, const std::vector<double>& dist) {
    std::vector<int> order(g.n);
    for (int i = 0; i < g.n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
    std::vector<int> cnt(g.n, 0);
    cnt[src] = 1;
    for (int w : order) {
        if (w == src) continue;
        long acc = 0;
        for (const auto& [u, len] : g.adj[w])
            if (std::abs(dist[u] + len - dist[w]) <= kEps) acc += cnt[u];
        cnt[w] = static_cast<int>(std::min<long>(acc, 2));
    }
    return cnt;
}

struct Metrics {
    std::vector<std::vector<double>> dist;
    std::vector<std::vector<bool>> unique;  // unique[p][q]: exactly one geodesic
};

Metrics compute_metrics(const WeightedGraph& g) {
    Metrics m;
    m.dist.resize(g.n);
    m.unique.assign(g.n, std::vector<bool>(g.n, false));
    for (int p = 0; p < g.n; ++p) {
        m.dist[p] = dijkstra(g, p);
        const std::vector<int> cnt = path_counts(g, p, m.dist[p]);
        for (int q = 0; q < g.n; ++q) m.unique[p][q] = cnt[q] == 1;
    }
    return m;
}

std::int64_t count_through_ball(const Metrics& m, const std::vector<int>& ball, int p,
                                int q) {
    for (int w : ball)
        if (m.dist[p][w] + m.dist[w][q] <= m.dist[p][q] + kEps) return 1;
    return 0;
}

double density_for(const Metrics& m, int n, int x, double r, TrafficMode mode) {
    std::vector<int> ball;
    for (int w = 0; w < n; ++w)
        if (m.dist[x][w] <= r + kEps) ball.push_back(w);
    std::int64_t hits = 0, total = 0;
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if (mode == TrafficMode::kUniqueOnly && !m.unique[p][q]) continue;
            ++total;
            hits += count_through_ball(m, ball, p, q);
        }
    }
    return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

double delta_of_quadruple(const std::vector<std::vector<double>>& d, int i, int j, int k, int l) {
    const double s1 = d[i][j] + d[k][l];
    const double s2 = d[i][k] + d[j][l];
    const double s3 = d[i][l] + d[j][k];
    double big = s1, mid = s2, low = s3;
    if (big < mid) std::swap(big, mid);
    if (mid < low) std::swap(mid, low);
    if (big < mid) std::swap(big, mid);
    return 0.25 * (big - mid);
}

}  // namespace

WeightedGraph make_graph(int n_vertices, std::vector<WeightedGraph::Edge> edges) {
    if (n_vertices < 1) throw InvalidInputError("make_graph: needs at least one vertex");
    WeightedGraph g;
    g.n = n_vertices;
    g.adj.resize(n_vertices);
    for (const auto& e : edges) {
        if (e.u < 0 || e.u >= n_vertices || e.v < 0 || e.v >= n_vertices)
            throw InvalidInputError("make_graph: vertex id out of range");
        if (e.u == e.v) throw InvalidInputError("make_graph: self-loops are not allowed");
        if (!(e.len > 0.0)) throw InvalidInputError("make_graph: edge lengths must be positive");
        g.adj[e.u].push_back({e.v, e.len});
        g.adj[e.v].push_back({e.u, e.len});
    }
    g.edges = std::move(edges);

    // connectivity check with component listing
    std::vector<int> comp(g.n, -1);
    int n_comp = 0;
    for (int s = 0; s < g.n; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> bfs;
        bfs.push(s);
        comp[s] = n_comp;
        while (!bfs.empty()) {
            const int u = bfs.front();
            bfs.pop();
            for (const auto& [v, len] : g.adj[u])
                if (comp[v] < 0) {
                    comp[v] = n_comp;
                    bfs.push(v);
                }
        }
        ++n_comp;
    }
    if (n_comp > 1) {
        std::ostringstream msg;
        msg << "make_graph: graph is disconnected (" << n_comp << " components):";
        for (int c = 0; c < std::min(n_comp, 4); ++c) {
            msg << " {";
            int listed = 0;
            for (int v = 0; v < g.n && listed < 6; ++v)
                if (comp[v] == c) msg << (listed++ ? "," : "") << v;
            msg << (std::count(comp.begin(), comp.end(), c) > 6 ? ",...}" : "}");
        }
        if (n_comp > 4) msg << " ...";
        throw InvalidInputError(msg.str());
    }
    return g;
}

WeightedGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_graph: cannot open \"" + path + "\"");
    std::vector<WeightedGraph::Edge> edges;
    std::string line;
    int line_no = 0;
    int max_id = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u)) continue;  // blank/comment line
        double len = 1.0;
        if (!(ls >> v)) {
            throw ParseError("load_graph: line " + std::to_string(line_no) +
                             ": expected \"u v [length]\"");
        }
        std::string rest;
        if (ls >> rest) {
            try {
                std::size_t used = 0;
                len = std::stod(rest, &used);
                if (used != rest.size()) throw std::invalid_argument("");
            } catch (...) {
                throw ParseError("load_graph: line " + std::to_string(line_no) +
                                 ": bad edge length \"" + rest + "\"");
            }
            std::string extra;
            if (ls >> extra)
                throw ParseError("load_graph: line " + std::to_string(line_no) +
                                 ": trailing tokens");
        }
        if (u < 0 || v < 0)
            throw ParseError("load_graph: line " + std::to_string(line_no) +
                             ": vertex ids must be non-negative");
        if (!(len > 0.0))
            throw ParseError("load_graph: line " + std::to_string(line_no) +
                             ": edge lengths must be positive");
        if (u == v)
            throw ParseError("load_graph: line " + std::to_string(line_no) +
                             ": self-loops are not allowed");
        edges.push_back({static_cast<int>(u), static_cast<int>(v), len});
        max_id = std::max(max_id, static_cast<int>(std::max(u, v)));
    }
    if (edges.empty()) throw ParseError("load_graph: no edges in \"" + path + "\"");
    try {
        return make_graph(max_id + 1, std::move(edges));
    } catch (const InvalidInputError& e) {
        throw InvalidInputError("load_graph: " + std::string(e.what()));
    }
}

std::vector<double> dijkstra(const WeightedGraph& g, int src) {
    if (src < 0 || src >= g.n) throw InvalidInputError("dijkstra: source out of range");
    std::vector<double> dist(g.n, std::numeric_limits<double>::infinity());
    dist[src] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.push({0.0, src});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, len] : g.adj[u]) {
            const double nd = d + len;
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
    }
    return dist;
}

std::vector<std::vector<double>> all_pairs_distances(const WeightedGraph& g) {
    std::vector<std::vector<double>> d(g.n);
    for (int i = 0; i < g.n; ++i) d[i] = dijkstra(g, i);
    return d;
}

const char* traffic_mode_name(TrafficMode mode) {
    return mode == TrafficMode::kAnyGeodesic ? "any-geodesic" : "unique-only";
}

TrafficMode traffic_mode_from_name(const std::string& name) {
    if (name == "any-geodesic") return TrafficMode::kAnyGeodesic;
    if (name == "unique-only") return TrafficMode::kUniqueOnly;
    throw ParseError("unknown traffic mode \"" + name + "\" (any-geodesic | unique-only)");
}

double traffic_density_vertex(const WeightedGraph& g, int x, double r, TrafficMode mode) {
    if (x < 0 || x >= g.n) throw InvalidInputError("traffic_density_vertex: vertex out of range");
    if (r < 0.0) throw InvalidInputError("traffic_density_vertex: radius must be >= 0");
    const Metrics m = compute_metrics(g);
    return density_for(m, g.n, x, r, mode);
}

double gromov_delta(const WeightedGraph& g) {
    if (g.n > 400)
        throw InvalidInputError(
            "gromov_delta: exact scan guarded at |V| <= 400; use gromov_delta_sampled for a "
            "lower bound");
    const auto d = all_pairs_distances(g);
    double best = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            for (int k = j + 1; k < g.n; ++k)
                for (int l = k + 1; l < g.n; ++l)
                    best = std::max(best, delta_of_quadruple(d, i, j, k, l));
    return best;
}

double gromov_delta_sampled(const WeightedGraph& g, std::int64_t n_tuples, std::uint64_t seed) {
    if (g.n < 4) return 0.0;
    const auto d = all_pairs_distances(g);
    RngStream rng(seed);
    double best = 0.0;
    for (std::int64_t t = 0; t < n_tuples; ++t) {
        int v[4];
        for (int a = 0; a < 4; ++a) {
            bool fresh;
            do {
                v[a] = static_cast<int>(rng.below(g.n));
                fresh = true;
                for (int b = 0; b < a; ++b) fresh = fresh && v[b] != v[a];
            } while (!fresh);
        }
        best = std::max(best, delta_of_quadruple(d, v[0], v[1], v[2], v[3]));
    }
    return best;
}

GraphTrafficReport core_report(const WeightedGraph& g, const std::vector<double>& radii,
                               TrafficMode mode, bool with_delta) {
    const Metrics m = compute_metrics(g);
    GraphTrafficReport rep;
    rep.mode = mode;
    rep.radii = radii;
    rep.density0.resize(g.n);
    rep.density_r.assign(g.n, std::vector<double>(radii.size(), 0.0));
    for (int x = 0; x < g.n; ++x) {
        rep.density0[x] = density_for(m, g.n, x, 0.0, mode);
        for (std::size_t ri = 0; ri < radii.size(); ++ri)
            rep.density_r[x][ri] = density_for(m, g.n, x, radii[ri], mode);
    }
    rep.core_vertex = 0;
    for (int x = 1; x < g.n; ++x)
        if (rep.density0[x] > rep.density0[rep.core_vertex]) rep.core_vertex = x;
    if (with_delta && g.n <= 400) {
        rep.delta = gromov_delta(g);
        rep.core_radius_hint = 4.0 * rep.delta;
    }
    return rep;
}

nlohmann::json graph_report_json(const GraphTrafficReport& rep, const WeightedGraph& g) {
    nlohmann::json j;
    j["n_vertices"] = g.n;
    j["n_edges"] = g.edges.size();
    j["mode"] = traffic_mode_name(rep.mode);
    j["pair_count_note"] = "ordered pairs including p=q; |Gamma| = |V|^2";
    j["radii"] = rep.radii;
    j["density"] = rep.density0;
    j["density_r"] = rep.density_r;
    j["core_vertex"] = rep.core_vertex;
    if (rep.delta >= 0.0) {
        j["gromov_delta"] = rep.delta;
        j["core_radius_hint"] = rep.core_radius_hint;
    }
    return j;
}

std::string graph_report_csv(const GraphTrafficReport& rep) {
    std::ostringstream out;
    out.precision(17);
    out << "vertex,D0";
    for (double r : rep.radii) out << ",D_r" << r;
    out << "\n";
    for (std::size_t x = 0; x < rep.density0.size(); ++x) {
        out << x << ',' << rep.density0[x];
        for (std::size_t ri = 0; ri < rep.radii.size(); ++ri) out << ',' << rep.density_r[x][ri];
        out << "\n";
    }
    return out.str();
}

}  // namespace corecut
