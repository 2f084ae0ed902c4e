#include "dlayer/partition.hpp"

#include <numeric>
#include <string>

namespace dlayer {

const char* to_string(Scheme s) noexcept { return s == Scheme::Row ? "row" : "column"; }

std::size_t Partition::x_dim(std::size_t i, std::size_t j) const
{
    const ClusterBlock& c = clusters.at(i);
    return scheme == Scheme::Row ? c.agents.at(j).size : c.size;
}

std::size_t Partition::z_dim(std::size_t i, std::size_t j) const
{
    const ClusterBlock& c = clusters.at(i);
    return scheme == Scheme::Row ? c.size : c.agents.at(j).size;
}

std::size_t Partition::stacked_x_dim() const
{
    std::size_t d = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
        for (std::size_t j = 0; j < clusters[i].agents.size(); ++j)
            d += x_dim(i, j);
    return d;
}

std::size_t Partition::stacked_z_dim() const
{
    std::size_t d = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
        for (std::size_t j = 0; j < clusters[i].agents.size(); ++j)
            d += z_dim(i, j);
    return d;
}

std::vector<Matrix> selection_matrices(std::span<const std::size_t> sizes, std::size_t total)
{
    const std::size_t sum = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    if (sum != total)
        throw Error(ErrorKind::SumMismatch, "selection sizes sum to " + std::to_string(sum) +
                                                ", expected " + std::to_string(total));
    std::vector<Matrix> out;
    out.reserve(sizes.size());
    std::size_t offset = 0;
    for (std::size_t s : sizes) {
        if (s == 0)
            throw Error(ErrorKind::LayoutMismatch, "zero-size selection band");
        Matrix e(s, total);
        for (std::size_t r = 0; r < s; ++r)
            e(r, offset + r) = 1.0;
        out.push_back(std::move(e));
        offset += s;
    }
    return out;
}

namespace {

constexpr double kOffsetSumTolerance = 1e-12;

void check_common(const ProblemInstance& inst, std::size_t cluster_total, std::size_t agent_total,
                  const char* cluster_dim, const char* agent_dim)
{
    if (inst.a.rows() != inst.b.dim())
        throw Error(ErrorKind::ShapeMismatch, "A has " + std::to_string(inst.a.rows()) +
                                                  " rows but b has dimension " +
                                                  std::to_string(inst.b.dim()));
    const Layout& lay = inst.layout;
    const Topology& topo = inst.topology;
    if (lay.cluster_sizes.size() != topo.cluster_count())
        throw Error(ErrorKind::TopologyMismatch,
                    "layout lists " + std::to_string(lay.cluster_sizes.size()) +
                        " clusters but the cluster graph has " +
                        std::to_string(topo.cluster_count()) + " nodes");
    if (lay.agent_sizes.size() != lay.cluster_sizes.size())
        throw Error(ErrorKind::LayoutMismatch, "layout agent size lists do not match cluster count");

    std::size_t sum = 0;
    for (std::size_t i = 0; i < lay.cluster_sizes.size(); ++i) {
        if (lay.cluster_sizes[i] == 0)
            throw Error(ErrorKind::LayoutMismatch,
                        std::string("cluster ") + std::to_string(i) + " has zero " + cluster_dim);
        sum += lay.cluster_sizes[i];
    }
    if (sum != cluster_total)
        throw Error(ErrorKind::LayoutMismatch, std::string("cluster ") + cluster_dim + " sum to " +
                                                   std::to_string(sum) + ", expected " +
                                                   std::to_string(cluster_total));

    for (std::size_t i = 0; i < lay.agent_sizes.size(); ++i) {
        const auto& sizes = lay.agent_sizes[i];
        if (sizes.size() != topo.agent_count(i))
            throw Error(ErrorKind::TopologyMismatch,
                        "cluster " + std::to_string(i) + " layout lists " +
                            std::to_string(sizes.size()) + " agents but its agent graph has " +
                            std::to_string(topo.agent_count(i)) + " nodes");
        std::size_t s = 0;
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            if (sizes[j] == 0)
                throw Error(ErrorKind::LayoutMismatch, "agent " + std::to_string(j) +
                                                           " of cluster " + std::to_string(i) +
                                                           " has zero " + agent_dim);
            s += sizes[j];
        }
        if (s != agent_total)
            throw Error(ErrorKind::LayoutMismatch,
                        "cluster " + std::to_string(i) + " agent " + agent_dim + " sum to " +
                            std::to_string(s) + ", expected " + std::to_string(agent_total));
    }

    if (inst.offsets) {
        if (inst.offsets->size() != lay.agent_sizes.size())
            throw Error(ErrorKind::LayoutMismatch, "offsets do not match cluster count");
        for (std::size_t i = 0; i < inst.offsets->size(); ++i)
            if ((*inst.offsets)[i].size() != lay.agent_sizes[i].size())
                throw Error(ErrorKind::LayoutMismatch,
                            "offsets of cluster " + std::to_string(i) + " do not match agent count");
    }
}

}  // namespace

Partition partition_rows(const ProblemInstance& inst)
{
    const std::size_t m = inst.a.rows();
    const std::size_t n = inst.a.cols();
    check_common(inst, m, n, "rows", "columns");

    Partition part;
    part.scheme = Scheme::Row;
    part.rows = m;
    part.cols = n;

    std::size_t row = 0;
    for (std::size_t i = 0; i < inst.layout.cluster_sizes.size(); ++i) {
        const std::size_t mi = inst.layout.cluster_sizes[i];
        const auto& widths = inst.layout.agent_sizes[i];
        ClusterBlock cluster{row, mi, inst.b.segment(row, mi), {}};
        const Matrix ai = inst.a.block(row, 0, mi, n);
        auto selections = selection_matrices(widths, n);

        const double share = 1.0 / static_cast<double>(widths.size());
        Vector offset_sum(mi);
        std::size_t col = 0;
        for (std::size_t j = 0; j < widths.size(); ++j) {
            Vector bij;
            if (inst.offsets) {
                bij = (*inst.offsets)[i][j];
                if (bij.dim() != mi)
                    throw Error(ErrorKind::LayoutMismatch,
                                "offset of agent " + std::to_string(j) + " in cluster " +
                                    std::to_string(i) + " has dimension " +
                                    std::to_string(bij.dim()) + ", expected " + std::to_string(mi));
                offset_sum += bij;
            } else {
                bij = share * cluster.b;
            }
            cluster.agents.push_back(
                AgentBlock{ai.block(0, col, mi, widths[j]), std::move(bij), col, widths[j],
                           std::move(selections[j])});
            col += widths[j];
        }
        if (inst.offsets &&
            (offset_sum - cluster.b).norm() > kOffsetSumTolerance * (1.0 + cluster.b.norm()))
            throw Error(ErrorKind::SumMismatch,
                        "offsets of cluster " + std::to_string(i) + " do not sum to b_i");
        part.clusters.push_back(std::move(cluster));
        row += mi;
    }
    return part;
}

Partition partition_columns(const ProblemInstance& inst)
{
    const std::size_t m = inst.a.rows();
    const std::size_t n = inst.a.cols();
    check_common(inst, n, m, "columns", "rows");

    Partition part;
    part.scheme = Scheme::Column;
    part.rows = m;
    part.cols = n;

    const std::size_t c = inst.layout.cluster_sizes.size();
    const double share = 1.0 / static_cast<double>(c);
    Vector offset_total(m);
    std::size_t col = 0;
    for (std::size_t i = 0; i < c; ++i) {
        const std::size_t ni = inst.layout.cluster_sizes[i];
        const auto& heights = inst.layout.agent_sizes[i];
        const Matrix ai = inst.a.block(0, col, m, ni);
        auto selections = selection_matrices(heights, m);

        ClusterBlock cluster{col, ni, Vector(m), {}};
        if (inst.offsets) {
            std::size_t row = 0;
            for (std::size_t j = 0; j < heights.size(); ++j) {
                const Vector& bij = (*inst.offsets)[i][j];
                if (bij.dim() != heights[j])
                    throw Error(ErrorKind::LayoutMismatch,
                                "offset of agent " + std::to_string(j) + " in cluster " +
                                    std::to_string(i) + " has dimension " +
                                    std::to_string(bij.dim()) + ", expected " +
                                    std::to_string(heights[j]));
                cluster.b.set_segment(row, bij);
                row += heights[j];
            }
            offset_total += cluster.b;
        } else {
            cluster.b = share * inst.b;
        }

        std::size_t row = 0;
        for (std::size_t j = 0; j < heights.size(); ++j) {
            cluster.agents.push_back(AgentBlock{ai.block(row, 0, heights[j], ni),
                                                cluster.b.segment(row, heights[j]), row,
                                                heights[j], std::move(selections[j])});
            row += heights[j];
        }
        part.clusters.push_back(std::move(cluster));
        col += ni;
    }
    if (inst.offsets &&
        (offset_total - inst.b).norm() > kOffsetSumTolerance * (1.0 + inst.b.norm()))
        throw Error(ErrorKind::SumMismatch, "cluster offsets do not sum to b");
    return part;
}

Partition make_partition(const ProblemInstance& inst)
{
    return inst.scheme == Scheme::Row ? partition_rows(inst) : partition_columns(inst);
}

std::pair<Matrix, Vector> reassemble(const Partition& part)
{
    Matrix a(part.rows, part.cols);
    Vector b(part.rows);
    for (const ClusterBlock& cluster : part.clusters) {
        for (const AgentBlock& agent : cluster.agents) {
            if (part.scheme == Scheme::Row)
                a.set_block(cluster.offset, agent.offset, agent.a);
            else
                a.set_block(agent.offset, cluster.offset, agent.a);
        }
        // Row: b_i occupies its band. Column: b = sum_i b_i.
        if (part.scheme == Scheme::Row)
            b.set_segment(cluster.offset, cluster.b);
        else
            b += cluster.b;
    }
    return {std::move(a), std::move(b)};
}

void require_compatible(const Partition& part, const Topology& topo)
{
    if (part.cluster_count() != topo.cluster_count())
        throw Error(ErrorKind::TopologyMismatch,
                    "partition has " + std::to_string(part.cluster_count()) +
                        " clusters, topology has " + std::to_string(topo.cluster_count()));
    for (std::size_t i = 0; i < part.cluster_count(); ++i)
        if (part.agent_count(i) != topo.agent_count(i))
            throw Error(ErrorKind::TopologyMismatch,
                        "cluster " + std::to_string(i) + " has " +
                            std::to_string(part.agent_count(i)) + " agents in the partition and " +
                            std::to_string(topo.agent_count(i)) + " in the topology");
}

}  // namespace dlayer
