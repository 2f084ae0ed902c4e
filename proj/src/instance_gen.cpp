#include "dlayer/instance_gen.hpp"

#include <algorithm>
#include <numeric>

namespace dlayer {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    // splitmix64 finalizer over the combined key
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

std::size_t uniform_size(std::size_t lo, std::size_t hi, Rng& rng)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

Graph random_connected_graph(std::size_t node_count, Rng& rng)
{
    std::vector<std::size_t> order(node_count);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Edge> edges;
    for (std::size_t k = 1; k < node_count; ++k)
        edges.emplace_back(order[k], order[uniform_size(0, k - 1, rng)]);
    if (node_count > 1) {
        const std::size_t extra = uniform_size(0, node_count, rng);
        for (std::size_t e = 0; e < extra; ++e) {
            const std::size_t a = uniform_size(0, node_count - 1, rng);
            const std::size_t b = uniform_size(0, node_count - 1, rng);
            if (a != b)
                edges.emplace_back(a, b);
        }
    }
    return build_graph(node_count, edges);
}

std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts, Rng& rng)
{
    if (parts == 0 || parts > total)
        throw Error(ErrorKind::InvalidArgument, "cannot split into that many positive parts");
    // Choose parts-1 distinct cut points in 1..total-1.
    std::vector<std::size_t> points(total - 1);
    std::iota(points.begin(), points.end(), 1);
    std::shuffle(points.begin(), points.end(), rng);
    std::vector<std::size_t> cuts(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(parts - 1));
    std::sort(cuts.begin(), cuts.end());

    std::vector<std::size_t> out;
    std::size_t prev = 0;
    for (std::size_t c : cuts) {
        out.push_back(c - prev);
        prev = c;
    }
    out.push_back(total - prev);
    return out;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = dist(rng);
    return m;
}

Vector random_vector(std::size_t dim, Rng& rng)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(dim);
    for (double& e : v.values())
        e = dist(rng);
    return v;
}

ProblemInstance random_instance(Scheme scheme, const InstanceLimits& limits, Rng& rng)
{
    const std::size_t clusters =
        std::min(uniform_size(limits.min_clusters, limits.max_clusters, rng), limits.max_dim);
    std::vector<std::size_t> agents(clusters);
    for (auto& a : agents)
        a = std::min(uniform_size(limits.min_agents, limits.max_agents, rng), limits.max_dim);
    const std::size_t max_agents = *std::max_element(agents.begin(), agents.end());

    // The dimension split across clusters must admit one unit per cluster, the
    // one split across agents one unit per agent.
    const std::size_t cluster_dim =
        uniform_size(std::max(limits.min_dim, clusters), limits.max_dim, rng);
    const std::size_t agent_dim =
        uniform_size(std::max(limits.min_dim, max_agents), limits.max_dim, rng);

    ProblemInstance inst;
    inst.scheme = scheme;
    const std::size_t m = scheme == Scheme::Row ? cluster_dim : agent_dim;
    const std::size_t n = scheme == Scheme::Row ? agent_dim : cluster_dim;
    inst.a = random_matrix(m, n, rng);
    inst.b = inst.a * random_vector(n, rng);

    inst.layout.cluster_sizes = random_composition(cluster_dim, clusters, rng);
    for (std::size_t i = 0; i < clusters; ++i)
        inst.layout.agent_sizes.push_back(random_composition(agent_dim, agents[i], rng));

    Graph cluster_graph = random_connected_graph(clusters, rng);
    std::vector<Graph> agent_graphs;
    for (std::size_t i = 0; i < clusters; ++i)
        agent_graphs.push_back(random_connected_graph(agents[i], rng));
    inst.topology = make_topology(std::move(cluster_graph), std::move(agent_graphs));
    return inst;
}

}  // namespace dlayer
