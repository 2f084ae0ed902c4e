#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "dlayer/graph.hpp"
#include "dlayer/partition.hpp"

namespace dlayer {

using Rng = std::mt19937_64;

// Derives an independent stream seed for item `index` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

// Random spanning tree over a shuffled node order plus up to node_count extra edges.
Graph random_connected_graph(std::size_t node_count, Rng& rng);

// `parts` positive integers summing to `total` (requires 1 <= parts <= total).
std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts, Rng& rng);

struct InstanceLimits {
    std::size_t min_dim = 1;
    std::size_t max_dim = 10;
    std::size_t min_clusters = 1;
    std::size_t max_clusters = 4;
    std::size_t min_agents = 1;
    std::size_t max_agents = 4;
};

// Consistent random instance: A uniform in [-1, 1], b = A x_true with x_true
// uniform in [-1, 1], random connected graphs and a random contiguous layout.
ProblemInstance random_instance(Scheme scheme, const InstanceLimits& limits, Rng& rng);

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng);
Vector random_vector(std::size_t dim, Rng& rng);

}  // namespace dlayer
