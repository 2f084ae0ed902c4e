#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dlayer/graph.hpp"
#include "dlayer/partition.hpp"
#include "dlayer/simulator.hpp"

namespace dlayer {

// Unvalidated graph description as written in a scenario file.
struct GraphSpec {
    std::size_t nodes = 0;
    std::vector<Edge> edges;

    friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

// A scenario file: problem data, both layers of the network, block layouts
// and simulation settings.
//
//   {
//     "scheme": "row" | "column",
//     "A": [[...], ...], "b": [...],
//     "cluster_graph": {"nodes": 3, "edges": [[0, 1], [1, 2]]},
//     "agent_graphs": [{"nodes": 2, "edges": [[0, 1]]}, ...],
//     "row_layout": {"cluster_rows": [...], "agent_cols": [[...], ...]},
//     "column_layout": {"cluster_cols": [...], "agent_rows": [[...], ...]},
//     "row_offsets": [[[...], ...], ...],      (optional)
//     "column_offsets": [[[...], ...], ...],   (optional)
//     "sim": {"step_size": "auto" | h, "max_time": T, "stationarity_tol": eps,
//             "record_every": k, "seed": s, "init": "zeros" | "random",
//             "amplitude": a, "reference": [...]}
//   }
//
// Only the layout of the scheme being run is required.
struct Scenario {
    Scheme scheme = Scheme::Row;
    Matrix a;
    Vector b;
    GraphSpec cluster_graph;
    std::vector<GraphSpec> agent_graphs;
    std::optional<Layout> row_layout;
    std::optional<Layout> column_layout;
    std::optional<Offsets> row_offsets;
    std::optional<Offsets> column_offsets;
    SimConfig sim;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Throws Error(Parse) naming the line/column of a syntax error or the JSON
// path of an invalid field.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

std::string serialize_scenario(const Scenario& sc);

// Validates graphs and layout and builds the instance for `scheme` (defaults to
// sc.scheme). Topology errors name the offending cluster.
ProblemInstance build_instance(const Scenario& sc, std::optional<Scheme> scheme = std::nullopt);

std::optional<Scheme> parse_scheme(const std::string& name);

}  // namespace dlayer
