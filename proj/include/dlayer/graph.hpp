#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dlayer/linalg.hpp"

namespace dlayer {

using Edge = std::pair<std::size_t, std::size_t>;

// Connected, bidirectional, unit-weight graph. Edges are stored once as
// (low, high) pairs; self-loops are never stored.
class Graph {
public:
    std::size_t node_count() const noexcept { return adjacency_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    // Adjacent nodes, ascending, excluding the node itself.
    std::span<const std::size_t> neighbors(std::size_t node) const { return adjacency_.at(node); }

    // Neighbor set in the closed convention: adjacent nodes plus the node itself.
    std::vector<std::size_t> neighborhood(std::size_t node) const;

    std::size_t degree(std::size_t node) const { return adjacency_.at(node).size(); }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    friend Graph build_graph(std::size_t, std::span<const Edge>);

    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

// Validates and builds a graph. Duplicate edges (in either orientation) are
// merged. Throws OutOfRangeEndpoint, DisconnectedGraph, or InvalidArgument for
// node_count == 0 or a self-loop.
Graph build_graph(std::size_t node_count, std::span<const Edge> edges);

Matrix laplacian(const Graph& g);

// laplacian(g) (x) I_block_dim
Matrix lifted_laplacian(const Graph& g, std::size_t block_dim);

// The two communication layers: a graph over clusters and, for each cluster,
// a graph over its agents.
struct Topology {
    Graph clusters;
    std::vector<Graph> agents;

    std::size_t cluster_count() const noexcept { return clusters.node_count(); }
    std::size_t agent_count(std::size_t cluster) const { return agents.at(cluster).node_count(); }

    friend bool operator==(const Topology&, const Topology&) = default;
};

// Throws TopologyMismatch when the number of agent graphs differs from the
// number of cluster nodes.
Topology make_topology(Graph clusters, std::vector<Graph> agents);

}  // namespace dlayer
