#include "dlayer/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dlayer {

using nlohmann::json;

std::optional<Scheme> parse_scheme(const std::string& name)
{
    if (name == "row")
        return Scheme::Row;
    if (name == "column")
        return Scheme::Column;
    return std::nullopt;
}

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what)
{
    throw Error(ErrorKind::Parse, "field " + (path.empty() ? std::string("/") : path) + ": " + what);
}

const json& member(const json& obj, const std::string& path, const char* key)
{
    if (!obj.is_object())
        field_error(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        field_error(path + "/" + key, "missing required field");
    return *it;
}

double number(const json& v, const std::string& path)
{
    if (!v.is_number())
        field_error(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        field_error(path, "expected a finite number");
    return d;
}

std::size_t count(const json& v, const std::string& path)
{
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
        field_error(path, "expected a non-negative integer");
    return v.get<std::size_t>();
}

const json& array(const json& v, const std::string& path)
{
    if (!v.is_array())
        field_error(path, "expected an array");
    return v;
}

Vector read_vector(const json& v, const std::string& path)
{
    std::vector<double> out;
    for (std::size_t k = 0; k < array(v, path).size(); ++k)
        out.push_back(number(v[k], path + "/" + std::to_string(k)));
    return Vector(std::move(out));
}

std::vector<std::size_t> read_counts(const json& v, const std::string& path)
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < array(v, path).size(); ++k)
        out.push_back(count(v[k], path + "/" + std::to_string(k)));
    return out;
}

Matrix read_matrix(const json& v, const std::string& path)
{
    const json& rows = array(v, path);
    if (rows.empty())
        field_error(path, "matrix needs at least one row");
    std::vector<double> data;
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string row_path = path + "/" + std::to_string(r);
        const Vector row = read_vector(rows[r], row_path);
        if (r == 0)
            cols = row.dim();
        else if (row.dim() != cols)
            field_error(row_path, "row has " + std::to_string(row.dim()) + " entries, expected " +
                                      std::to_string(cols));
        data.insert(data.end(), row.std().begin(), row.std().end());
    }
    if (cols == 0)
        field_error(path, "matrix needs at least one column");
    return Matrix(rows.size(), cols, std::move(data));
}

GraphSpec read_graph(const json& v, const std::string& path)
{
    GraphSpec g;
    g.nodes = count(member(v, path, "nodes"), path + "/nodes");
    const std::string edges_path = path + "/edges";
    const json& edges = array(member(v, path, "edges"), edges_path);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string e_path = edges_path + "/" + std::to_string(k);
        const json& e = array(edges[k], e_path);
        if (e.size() != 2)
            field_error(e_path, "edge must be a pair of node indices");
        g.edges.emplace_back(count(e[0], e_path + "/0"), count(e[1], e_path + "/1"));
    }
    return g;
}

Layout read_layout(const json& v, const std::string& path, const char* cluster_key,
                   const char* agent_key)
{
    Layout lay;
    lay.cluster_sizes = read_counts(member(v, path, cluster_key), path + "/" + cluster_key);
    const std::string agents_path = path + "/" + agent_key;
    const json& agents = array(member(v, path, agent_key), agents_path);
    for (std::size_t i = 0; i < agents.size(); ++i)
        lay.agent_sizes.push_back(read_counts(agents[i], agents_path + "/" + std::to_string(i)));
    return lay;
}

Offsets read_offsets(const json& v, const std::string& path)
{
    Offsets out;
    for (std::size_t i = 0; i < array(v, path).size(); ++i) {
        const std::string c_path = path + "/" + std::to_string(i);
        std::vector<Vector> cluster;
        for (std::size_t j = 0; j < array(v[i], c_path).size(); ++j)
            cluster.push_back(read_vector(v[i][j], c_path + "/" + std::to_string(j)));
        out.push_back(std::move(cluster));
    }
    return out;
}

SimConfig read_sim(const json& v, const std::string& path)
{
    SimConfig cfg;
    if (!v.is_object())
        field_error(path, "expected an object");
    if (auto it = v.find("step_size"); it != v.end()) {
        if (it->is_string() && it->get<std::string>() == "auto")
            cfg.step_size.reset();
        else
            cfg.step_size = number(*it, path + "/step_size");
    }
    if (auto it = v.find("max_time"); it != v.end())
        cfg.max_time = number(*it, path + "/max_time");
    if (auto it = v.find("stationarity_tol"); it != v.end())
        cfg.stationarity_tol = number(*it, path + "/stationarity_tol");
    if (auto it = v.find("record_every"); it != v.end())
        cfg.record_every = count(*it, path + "/record_every");
    if (auto it = v.find("seed"); it != v.end()) {
        if (!it->is_number_unsigned())
            field_error(path + "/seed", "expected a non-negative integer");
        cfg.seed = it->get<std::uint64_t>();
    }
    if (auto it = v.find("init"); it != v.end()) {
        const std::string mode = it->is_string() ? it->get<std::string>() : "";
        if (mode == "zeros")
            cfg.init = InitMode::Zeros;
        else if (mode == "random")
            cfg.init = InitMode::SeededRandom;
        else
            field_error(path + "/init", "expected \"zeros\" or \"random\"");
    }
    if (auto it = v.find("amplitude"); it != v.end())
        cfg.amplitude = number(*it, path + "/amplitude");
    if (auto it = v.find("reference"); it != v.end())
        cfg.reference = read_vector(*it, path + "/reference");
    try {
        validate(cfg);
    } catch (const Error& e) {
        field_error(path, e.what());
    }
    return cfg;
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < text.size() && k + 1 < byte; ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

json to_json(const Vector& v) { return json(v.std()); }

json to_json(const Matrix& m)
{
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const GraphSpec& g)
{
    json edges = json::array();
    for (auto [a, b] : g.edges)
        edges.push_back({a, b});
    return {{"nodes", g.nodes}, {"edges", std::move(edges)}};
}

json to_json(const Offsets& offsets)
{
    json out = json::array();
    for (const auto& cluster : offsets) {
        json c = json::array();
        for (const Vector& v : cluster)
            c.push_back(to_json(v));
        out.push_back(std::move(c));
    }
    return out;
}

json to_json(const Layout& lay, const char* cluster_key, const char* agent_key)
{
    return {{cluster_key, lay.cluster_sizes}, {agent_key, lay.agent_sizes}};
}

}  // namespace

Scenario parse_scenario(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_and_column(text, e.byte);
        throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ", column " +
                                          std::to_string(col) + ": malformed JSON");
    }
    if (!doc.is_object())
        field_error("", "scenario must be a JSON object");

    Scenario sc;
    const json& scheme = member(doc, "", "scheme");
    const auto parsed = scheme.is_string() ? parse_scheme(scheme.get<std::string>()) : std::nullopt;
    if (!parsed)
        field_error("/scheme", "expected \"row\" or \"column\"");
    sc.scheme = *parsed;

    sc.a = read_matrix(member(doc, "", "A"), "/A");
    sc.b = read_vector(member(doc, "", "b"), "/b");
    if (sc.b.dim() != sc.a.rows())
        field_error("/b", "has " + std::to_string(sc.b.dim()) + " entries but A has " +
                              std::to_string(sc.a.rows()) + " rows");

    sc.cluster_graph = read_graph(member(doc, "", "cluster_graph"), "/cluster_graph");
    const json& agents = array(member(doc, "", "agent_graphs"), "/agent_graphs");
    for (std::size_t i = 0; i < agents.size(); ++i)
        sc.agent_graphs.push_back(read_graph(agents[i], "/agent_graphs/" + std::to_string(i)));

    if (auto it = doc.find("row_layout"); it != doc.end())
        sc.row_layout = read_layout(*it, "/row_layout", "cluster_rows", "agent_cols");
    if (auto it = doc.find("column_layout"); it != doc.end())
        sc.column_layout = read_layout(*it, "/column_layout", "cluster_cols", "agent_rows");
    if (auto it = doc.find("row_offsets"); it != doc.end())
        sc.row_offsets = read_offsets(*it, "/row_offsets");
    if (auto it = doc.find("column_offsets"); it != doc.end())
        sc.column_offsets = read_offsets(*it, "/column_offsets");
    if (auto it = doc.find("sim"); it != doc.end())
        sc.sim = read_sim(*it, "/sim");
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Parse, "cannot read scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

std::string serialize_scenario(const Scenario& sc)
{
    json doc;
    doc["scheme"] = to_string(sc.scheme);
    doc["A"] = to_json(sc.a);
    doc["b"] = to_json(sc.b);
    doc["cluster_graph"] = to_json(sc.cluster_graph);
    doc["agent_graphs"] = json::array();
    for (const GraphSpec& g : sc.agent_graphs)
        doc["agent_graphs"].push_back(to_json(g));
    if (sc.row_layout)
        doc["row_layout"] = to_json(*sc.row_layout, "cluster_rows", "agent_cols");
    if (sc.column_layout)
        doc["column_layout"] = to_json(*sc.column_layout, "cluster_cols", "agent_rows");
    if (sc.row_offsets)
        doc["row_offsets"] = to_json(*sc.row_offsets);
    if (sc.column_offsets)
        doc["column_offsets"] = to_json(*sc.column_offsets);

    json sim;
    if (sc.sim.step_size)
        sim["step_size"] = *sc.sim.step_size;
    else
        sim["step_size"] = "auto";
    sim["max_time"] = sc.sim.max_time;
    sim["stationarity_tol"] = sc.sim.stationarity_tol;
    sim["record_every"] = sc.sim.record_every;
    sim["seed"] = sc.sim.seed;
    sim["init"] = sc.sim.init == InitMode::Zeros ? "zeros" : "random";
    sim["amplitude"] = sc.sim.amplitude;
    if (sc.sim.reference)
        sim["reference"] = to_json(*sc.sim.reference);
    doc["sim"] = std::move(sim);
    return doc.dump(2) + "\n";
}

ProblemInstance build_instance(const Scenario& sc, std::optional<Scheme> scheme)
{
    ProblemInstance inst;
    inst.scheme = scheme.value_or(sc.scheme);
    inst.a = sc.a;
    inst.b = sc.b;

    Graph clusters = [&] {
        try {
            return build_graph(sc.cluster_graph.nodes, sc.cluster_graph.edges);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string("cluster graph: ") + e.what());
        }
    }();
    std::vector<Graph> agents;
    for (std::size_t i = 0; i < sc.agent_graphs.size(); ++i) {
        try {
            agents.push_back(build_graph(sc.agent_graphs[i].nodes, sc.agent_graphs[i].edges));
        } catch (const Error& e) {
            throw Error(e.kind(), "agent graph of cluster " + std::to_string(i) + ": " + e.what());
        }
    }
    inst.topology = make_topology(std::move(clusters), std::move(agents));

    const auto& layout = inst.scheme == Scheme::Row ? sc.row_layout : sc.column_layout;
    if (!layout)
        throw Error(ErrorKind::Parse, std::string("field /") + to_string(inst.scheme) +
                                          "_layout: missing, required for the " +
                                          to_string(inst.scheme) + " scheme");
    inst.layout = *layout;
    inst.offsets = inst.scheme == Scheme::Row ? sc.row_offsets : sc.column_offsets;
    return inst;
}

}  // namespace dlayer
