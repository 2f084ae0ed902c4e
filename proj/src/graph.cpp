#include "dlayer/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace dlayer {

namespace {

struct DisjointSets {
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }

    std::vector<std::size_t> parent;
};

}  // namespace

std::vector<std::size_t> Graph::neighborhood(std::size_t node) const
{
    std::vector<std::size_t> out(adjacency_.at(node).begin(), adjacency_.at(node).end());
    out.insert(std::lower_bound(out.begin(), out.end(), node), node);
    return out;
}

Graph build_graph(std::size_t node_count, std::span<const Edge> edges)
{
    if (node_count == 0)
        throw Error(ErrorKind::InvalidArgument, "graph must have at least one node");

    std::vector<Edge> normalized;
    normalized.reserve(edges.size());
    for (auto [a, b] : edges) {
        if (a >= node_count || b >= node_count)
            throw Error(ErrorKind::OutOfRangeEndpoint,
                        "edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") has an endpoint outside [0," + std::to_string(node_count) + ")");
        if (a == b)
            throw Error(ErrorKind::InvalidArgument,
                        "self-loop on node " + std::to_string(a) + " is not an edge");
        normalized.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(normalized.begin(), normalized.end());
    normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());

    DisjointSets sets(node_count);
    std::size_t components = node_count;
    for (auto [a, b] : normalized)
        if (sets.unite(a, b))
            --components;
    if (components != 1)
        throw Error(ErrorKind::DisconnectedGraph,
                    "graph on " + std::to_string(node_count) + " nodes has " +
                        std::to_string(components) + " connected components");

    Graph g;
    g.adjacency_.resize(node_count);
    for (auto [a, b] : normalized) {
        g.adjacency_[a].push_back(b);
        g.adjacency_[b].push_back(a);
    }
    for (auto& adj : g.adjacency_)
        std::sort(adj.begin(), adj.end());
    g.edges_ = std::move(normalized);
    return g;
}

Matrix laplacian(const Graph& g)
{
    const std::size_t n = g.node_count();
    Matrix l(n, n);
    for (auto [a, b] : g.edges()) {
        l(a, a) += 1.0;
        l(b, b) += 1.0;
        l(a, b) = -1.0;
        l(b, a) = -1.0;
    }
    return l;
}

Matrix lifted_laplacian(const Graph& g, std::size_t block_dim)
{
    if (block_dim == 0)
        throw Error(ErrorKind::InvalidArgument, "lifted Laplacian needs block_dim >= 1");
    return kron(laplacian(g), Matrix::identity(block_dim));
}

Topology make_topology(Graph clusters, std::vector<Graph> agents)
{
    if (agents.size() != clusters.node_count())
        throw Error(ErrorKind::TopologyMismatch,
                    "cluster graph has " + std::to_string(clusters.node_count()) +
                        " nodes but " + std::to_string(agents.size()) + " agent graphs were given");
    return Topology{std::move(clusters), std::move(agents)};
}

}  // namespace dlayer
