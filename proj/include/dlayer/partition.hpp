#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dlayer/graph.hpp"
#include "dlayer/linalg.hpp"

namespace dlayer {

// Row: clusters own block rows of A and agree on x across clusters
//      (global consensus, local conservation).
// Column: clusters own block columns of A and agree on x inside each cluster
//      (local consensus, global conservation).
enum class Scheme { Row, Column };

const char* to_string(Scheme s) noexcept;

// Block sizes. For Scheme::Row, cluster_sizes are the row counts m_i and
// agent_sizes[i] the column counts n_ij. For Scheme::Column, cluster_sizes are
// the column counts n_i and agent_sizes[i] the row counts m_ij.
struct Layout {
    std::vector<std::size_t> cluster_sizes;
    std::vector<std::vector<std::size_t>> agent_sizes;

    friend bool operator==(const Layout&, const Layout&) = default;
};

// Per-agent right-hand side offsets b_ij, indexed [cluster][agent].
using Offsets = std::vector<std::vector<Vector>>;

struct ProblemInstance {
    Matrix a;
    Vector b;
    Topology topology;
    Scheme scheme = Scheme::Row;
    Layout layout;
    std::optional<Offsets> offsets;

    friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

struct AgentBlock {
    Matrix a;            // A_ij
    Vector b;            // b_ij
    std::size_t offset;  // start of the agent's band (columns for Row, rows for Column)
    std::size_t size;    // n_ij for Row, m_ij for Column
    Matrix selection;    // E_ij: size x n for Row, size x m for Column
};

struct ClusterBlock {
    std::size_t offset;  // start of the cluster's band (rows for Row, columns for Column)
    std::size_t size;    // m_i for Row, n_i for Column
    Vector b;            // b_i: m_i entries for Row, m entries for Column
    std::vector<AgentBlock> agents;
};

// Either a row partition or a column partition of (A, b), depending on scheme.
struct Partition {
    Scheme scheme = Scheme::Row;
    std::size_t rows = 0;  // m
    std::size_t cols = 0;  // n
    std::vector<ClusterBlock> clusters;

    std::size_t cluster_count() const noexcept { return clusters.size(); }
    std::size_t agent_count(std::size_t i) const { return clusters.at(i).agents.size(); }

    // Dimension of x_ij and z_ij.
    std::size_t x_dim(std::size_t i, std::size_t j) const;
    std::size_t z_dim(std::size_t i, std::size_t j) const;

    // Dimension of the cluster-stacked state relayed over the cluster layer
    // (n for Row, m for Column).
    std::size_t relay_dim() const noexcept { return scheme == Scheme::Row ? cols : rows; }

    std::size_t stacked_x_dim() const;
    std::size_t stacked_z_dim() const;
};

// E_j: the j-th contiguous band of rows of I_total. Throws SumMismatch when the
// sizes do not add up to total and LayoutMismatch for a zero size.
std::vector<Matrix> selection_matrices(std::span<const std::size_t> sizes, std::size_t total);

Partition partition_rows(const ProblemInstance& inst);
Partition partition_columns(const ProblemInstance& inst);
Partition make_partition(const ProblemInstance& inst);

// Rebuilds (A, b) from the blocks of a partition.
std::pair<Matrix, Vector> reassemble(const Partition& part);

// Throws TopologyMismatch if the partition's cluster/agent counts differ from
// the topology.
void require_compatible(const Partition& part, const Topology& topo);

}  // namespace dlayer
