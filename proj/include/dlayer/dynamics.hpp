#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dlayer/graph.hpp"
#include "dlayer/linalg.hpp"
#include "dlayer/partition.hpp"

namespace dlayer {

// Per-agent vectors indexed [cluster][agent].
using AgentVectors = std::vector<std::vector<Vector>>;

// Solution states x_ij and coordination states z_ij of every agent at one instant.
struct NetworkState {
    AgentVectors x;
    AgentVectors z;
    double time = 0.0;

    friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

struct StateDerivative {
    AgentVectors dx;
    AgentVectors dz;
};

NetworkState zero_state(const Partition& part);

// Throws ShapeMismatch unless every x_ij / z_ij has the dimension the partition prescribes.
void require_shape(const Partition& part, const NetworkState& s);

// Stacked [x; z] in cluster-major, agent-minor order, the ordering used by the
// compact system.
Vector stack(const NetworkState& s);
Vector stack(const StateDerivative& d);
NetworkState unstack(const Partition& part, const Vector& xz, double time = 0.0);

// Cluster-stacked vectors relayed over the cluster layer: col{x_i1..x_ic_i}
// for Row (dimension n), col{z_i1..z_ic_i} for Column (dimension m).
std::vector<Vector> cluster_relay(const Partition& part, const NetworkState& s);

struct AgentDerivative {
    Vector dx;
    Vector dz;
};

// Local flow of one agent from data it holds or receives:
//   r  = A x - b - sum_p (z - z_peer_p)
//   dx = -A' r - sum_q (x - x_peer_q)
//   dz = r
// In the row scheme z peers are agent neighbors and x peers are relayed
// cluster states E_ij x_k; in the column scheme the roles swap.
AgentDerivative local_flow(const Matrix& a, const Vector& b, const Vector& x, const Vector& z,
                           std::span<const Vector> z_peers, std::span<const Vector> x_peers);

// Wiring of every agent's inputs on the stacked [x; z] layout, fixed once per
// (partition, topology). Each agent reads its own states, the states of its
// agent neighbors, and the slices E_ij of its cluster neighbors' relayed stacks.
// Holds a reference to the partition, which must outlive it.
class AgentNetwork {
public:
    AgentNetwork(const Partition& part, const Topology& topo);

    std::size_t state_dim() const noexcept { return x_dim_ + z_dim_; }

    // dxz = derivative of every agent, both on the stacked layout.
    void evaluate(std::span<const double> xz, std::span<double> dxz) const;
    // Writes only the entries of agent (i, j) into dxz.
    void evaluate_agent(std::size_t cluster, std::size_t agent, std::span<const double> xz,
                        std::span<double> dxz) const;

    std::size_t x_offset(std::size_t cluster, std::size_t agent) const;
    std::size_t z_offset(std::size_t cluster, std::size_t agent) const;

private:
    struct Wiring {
        const AgentBlock* block;
        std::size_t x_off, z_off;
        std::vector<std::size_t> z_peers, x_peers;  // offsets of peer vectors
    };

    void evaluate_one(const Wiring& w, const double* xz, double* dxz,
                      std::vector<const double*>& zp, std::vector<const double*>& xp) const;

    std::size_t x_dim_ = 0;
    std::size_t z_dim_ = 0;
    std::vector<std::vector<Wiring>> agents_;
};

// Derivative of agent (i, j) only, reading nothing outside its neighborhood.
AgentDerivative agent_derivative(const Partition& part, const Topology& topo,
                                 const NetworkState& s, std::size_t cluster, std::size_t agent);

// Row-scheme updates for every agent.
StateDerivative agent_update_row(const Partition& part, const Topology& topo, const NetworkState& s);
// Column-scheme updates for every agent.
StateDerivative agent_update_col(const Partition& part, const Topology& topo, const NetworkState& s);
// Dispatches on part.scheme.
StateDerivative agent_update(const Partition& part, const Topology& topo, const NetworkState& s);

struct ResidualReport {
    Scheme scheme = Scheme::Row;
    // Row: one entry per cluster, ||sum_j (A_ij x_ij - b_ij)||.
    // Column: a single entry, ||sum_i (col_j A_ij x_ij - b_i)||.
    std::vector<double> conservation;
    // Row: a single entry, max over cluster pairs of ||x_i - x_k||.
    // Column: one entry per cluster, max over agent pairs of ||x_ij - x_il||.
    std::vector<double> consensus;
    // Reassembled solution estimate: mean of the cluster stacks (Row) or the
    // stacked per-cluster agent means (Column).
    Vector solution;
    // ||A solution - b||
    double overall = 0.0;

    double max_conservation() const;
    double max_consensus() const;
    bool within(double tol) const;
};

ResidualReport residuals(const Partition& part, const Topology& topo, const NetworkState& s);

// Reassembled solution estimate alone (see ResidualReport::solution).
Vector reassembled_solution(const Partition& part, const NetworkState& s);

}  // namespace dlayer
