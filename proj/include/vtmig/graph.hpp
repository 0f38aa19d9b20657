#pragma once

#include <vector>

#include "vtmig/scenario.hpp"

namespace vtmig {

/// Three-tier communication graph. Node order is vehicles, then edges, then
/// clouds. The adjacency has no self-loops; propagation adds them.
struct NetworkGraph {
    int n_vehicles = 0;
    int n_edges = 0;
    int n_clouds = 0;
    Mat adjacency;  // symmetric 0/1, zero diagonal

    int node_count() const { return n_vehicles + n_edges + n_clouds; }
    int vehicle_node(int v) const { return v; }
    int edge_node(int j) const { return n_vehicles + j; }
    int cloud_node(int i) const { return n_vehicles + n_edges + i; }
};

/// Per-node feature vector fed to the GCN: experience, utility, latency,
/// energy, migration cost. Zeros where a metric is undefined for the node.
struct NodeFeature {
    double ux = 0.0;
    double utility = 0.0;
    double latency = 0.0;
    double energy = 0.0;
    double mig_cost = 0.0;

    static constexpr int kDims = 5;
    Vec as_vec() const {
        Vec v(kDims);
        v << ux, utility, latency, energy, mig_cost;
        return v;
    }
};

/// Build the graph from the world: vehicle-edge links within coverage,
/// edge-cloud links always, edge-edge links between ring neighbours.
inline NetworkGraph build_graph(const World& w) {
    NetworkGraph g;
    g.n_vehicles = static_cast<int>(w.vehicles.size());
    g.n_edges = static_cast<int>(w.edges.size());
    g.n_clouds = static_cast<int>(w.clouds.size());
    const int n = g.node_count();
    g.adjacency = Mat::Zero(n, n);
    auto link = [&](int a, int b) {
        if (a == b) return;
        g.adjacency(a, b) = 1.0;
        g.adjacency(b, a) = 1.0;
    };
    for (const auto& v : w.vehicles)
        for (const auto& e : w.edges)
            if (w.ring_distance(v.position_m, e.position_m) <= e.coverage_radius_m)
                link(g.vehicle_node(v.id), g.edge_node(e.id));
    for (const auto& e : w.edges)
        for (const auto& c : w.clouds) link(g.edge_node(e.id), g.cloud_node(c.id));
    // ring neighbours; with two edges this is a single link, with one, none
    if (g.n_edges >= 2)
        for (int j = 0; j < g.n_edges; ++j) link(g.edge_node(j), g.edge_node((j + 1) % g.n_edges));
    return g;
}

}  // namespace vtmig
