#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dlayer/graph.hpp"
#include "dlayer/instance_gen.hpp"
#include "dlayer/linalg.hpp"
#include "dlayer/partition.hpp"

namespace testing {

using namespace dlayer;

inline double max_diff(const Vector& a, const Vector& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double max_diff(const Matrix& a, const Matrix& b)
{
    double d = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            d = std::max(d, std::abs(a(r, c) - b(r, c)));
    return d;
}

inline bool throws_kind(ErrorKind kind, const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind() == kind;
    }
    return false;
}

inline Graph path_graph(std::size_t n)
{
    std::vector<Edge> edges;
    for (std::size_t k = 1; k < n; ++k)
        edges.emplace_back(k - 1, k);
    return build_graph(n, edges);
}

inline Graph complete_graph(std::size_t n)
{
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            edges.emplace_back(a, b);
    return build_graph(n, edges);
}

// Instance with path graphs on both layers.
inline ProblemInstance make_instance(Scheme scheme, Matrix a, Vector b, Layout layout)
{
    std::vector<Graph> agents;
    for (const auto& sizes : layout.agent_sizes)
        agents.push_back(path_graph(sizes.size()));
    ProblemInstance inst;
    inst.scheme = scheme;
    inst.a = std::move(a);
    inst.b = std::move(b);
    inst.topology = make_topology(path_graph(layout.cluster_sizes.size()), std::move(agents));
    inst.layout = std::move(layout);
    return inst;
}

// The single-cluster, single-agent instance A = [2], b = (4).
inline ProblemInstance scalar_instance(Scheme scheme)
{
    return make_instance(scheme, Matrix{{2.0}}, Vector{4.0}, Layout{{1}, {{1}}});
}

}  // namespace testing
