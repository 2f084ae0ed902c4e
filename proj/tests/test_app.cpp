#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlayer/app.hpp"
#include "support.hpp"

using namespace dlayer;
using testing::throws_kind;
namespace fs = std::filesystem;

namespace {

const char* const kIdentity = R"({
  "scheme": "row",
  "A": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
  "b": [1, 2, 3, 4],
  "cluster_graph": {"nodes": 2, "edges": [[0, 1]]},
  "agent_graphs": [{"nodes": 2, "edges": [[0, 1]]}, {"nodes": 2, "edges": [[0, 1]]}],
  "row_layout": {"cluster_rows": [2, 2], "agent_cols": [[2, 2], [1, 3]]},
  "column_layout": {"cluster_cols": [2, 2], "agent_rows": [[2, 2], [3, 1]]},
  "sim": {"max_time": 500}
})";

// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("dlayer_test_app_" + name))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    fs::path write(const std::string& file, const std::string& text) const
    {
        std::ofstream(path / file) << text;
        return path / file;
    }
};

std::string read(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

struct CommandResult {
    int code;
    std::string out, err;
};

CommandResult run(const fs::path& scenario, const fs::path& out_dir,
                  std::optional<Scheme> scheme = std::nullopt)
{
    std::ostringstream out, err;
    const int code = run_command({scenario, out_dir, scheme}, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream row(line);
        std::string f;
        while (std::getline(row, f, ','))
            fields.push_back(f);
        if (!line.empty() && line.back() == ',')
            fields.emplace_back();
        rows.push_back(fields);
    }
    return rows;
}

}  // namespace

TEST_CASE("run writes artifacts for a converged scenario")
{
    TempDir dir("run");
    const fs::path scenario = dir.write("identity.json", kIdentity);
    for (Scheme scheme : {Scheme::Row, Scheme::Column}) {
        const fs::path out = dir.path / to_string(scheme);
        const CommandResult r = run(scenario, out, scheme);
        CHECK(r.code == 0);
        CHECK(r.err.empty());
        CHECK(r.out.find("converged") != std::string::npos);

        const auto summary = nlohmann::json::parse(read(out / kSummaryFile));
        CHECK(summary["scheme"] == to_string(scheme));
        CHECK(summary["outcome"] == "converged");
        CHECK(summary["residuals"]["max_conservation"].get<double>() < 1e-8);
        CHECK(summary["residuals"]["max_consensus"].get<double>() < 1e-8);
        CHECK(summary["residuals"]["overall"].get<double>() < 1e-8);
        CHECK(summary["spectral"]["passed"] == true);
        CHECK(summary["rate_fit"]["slope"].get<double>() < 0.0);
        const auto solution = summary["solution"].get<std::vector<double>>();
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(std::abs(solution[k] - static_cast<double>(k + 1)) < 1e-8);

        const auto rows = csv_rows(out / kTrajectoryFile);
        REQUIRE(rows.size() > 2);
        CHECK(rows[0] == std::vector<std::string>{"time", "V", "conservation_residual",
                                                  "consensus_residual", "overall_residual"});
        CHECK(std::stod(rows[1][0]) == 0.0);
    }
}

TEST_CASE("run exit codes")
{
    TempDir dir("codes");
    SUBCASE("parse error")
    {
        const CommandResult r = run(dir.write("bad.json", "{\"scheme\": "), dir.path / "out");
        CHECK(r.code == 2);
        CHECK(r.err.find("line") != std::string::npos);
        CHECK_FALSE(fs::exists(dir.path / "out"));
    }
    SUBCASE("missing file")
    {
        CHECK(run(dir.path / "absent.json", dir.path / "out").code == 2);
    }
    SUBCASE("layout error")
    {
        const auto text = replace(kIdentity, "[[2, 2], [1, 3]]", "[[2, 2], [1, 2]]");
        CHECK(run(dir.write("layout.json", text), dir.path / "out").code == 2);
    }
    SUBCASE("disconnected agent graph")
    {
        const auto text = replace(kIdentity, "{\"nodes\": 2, \"edges\": [[0, 1]]}]",
                                  "{\"nodes\": 2, \"edges\": []}]");
        const CommandResult r = run(dir.write("split.json", text), dir.path / "out");
        CHECK(r.code == 3);
        CHECK(r.err.find("cluster 1") != std::string::npos);
    }
    SUBCASE("divergence")
    {
        const auto text =
            replace(kIdentity, "\"max_time\": 500", "\"max_time\": 10000, \"step_size\": 10");
        const CommandResult r = run(dir.write("blowup.json", text), dir.path / "out");
        CHECK(r.code == 4);
        CHECK(r.err.find("NonFiniteState") != std::string::npos);
    }
    SUBCASE("inconsistent system")
    {
        const char* text = R"({
          "scheme": "row", "A": [[1], [1]], "b": [0, 1],
          "cluster_graph": {"nodes": 2, "edges": [[0, 1]]},
          "agent_graphs": [{"nodes": 1, "edges": []}, {"nodes": 1, "edges": []}],
          "row_layout": {"cluster_rows": [1, 1], "agent_cols": [[1], [1]]},
          "sim": {"max_time": 100}
        })";
        const CommandResult r = run(dir.write("inconsistent.json", text), dir.path / "out");
        CHECK(r.code == 5);
        // Artifacts are still written for inspection.
        CHECK(fs::exists(dir.path / "out" / kSummaryFile));
    }
    SUBCASE("unconverged within the horizon")
    {
        const auto text = replace(kIdentity, "\"max_time\": 500", "\"max_time\": 1");
        CHECK(run(dir.write("short.json", text), dir.path / "out").code == 5);
    }
}

TEST_CASE("plot data for a converged run")
{
    TempDir dir("plot");
    const fs::path out = dir.path / "run";
    REQUIRE(run(dir.write("identity.json", kIdentity), out).code == 0);
    std::ostringstream o, e;
    CHECK(plot_command(out, o, e) == 0);

    const auto rows = csv_rows(out / kLnVFile);
    REQUIRE(rows.size() > 12);
    CHECK(rows[0] == std::vector<std::string>{"time", "V", "ln_V", "fitted_ln_V"});
    std::vector<double> ln_v;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (!rows[k][2].empty())
            ln_v.push_back(std::stod(rows[k][2]));
    // The tail of ln V falls strictly.
    const std::size_t tail = ln_v.size() / 2;
    for (std::size_t k = tail + 1; k < ln_v.size(); ++k)
        CHECK(ln_v[k] < ln_v[k - 1]);

    const auto fit = nlohmann::json::parse(read(out / kFitFile));
    CHECK(fit["available"] == true);
    CHECK(fit["slope"].get<double>() < 0.0);
    CHECK(std::stod(rows[1][3]) == doctest::Approx(fit["intercept"].get<double>()));
}

TEST_CASE("plot data for a run started at equilibrium")
{
    TempDir dir("equilibrium");
    const auto text = replace(kIdentity, "\"b\": [1, 2, 3, 4]", "\"b\": [0, 0, 0, 0]");
    const fs::path out = dir.path / "run";
    REQUIRE(run(dir.write("zero.json", text), out).code == 0);
    emit_plotdata(out);
    const auto rows = csv_rows(out / kLnVFile);
    REQUIRE(rows.size() >= 2);
    for (std::size_t k = 1; k < rows.size(); ++k)
        CHECK(std::stod(rows[k][1]) <= 1e-12);
    CHECK(nlohmann::json::parse(read(out / kFitFile))["available"] == false);
}

TEST_CASE("plot errors leave no partial files")
{
    TempDir dir("plot_errors");
    auto no_outputs = [&] {
        return !fs::exists(dir.path / kLnVFile) && !fs::exists(dir.path / kFitFile);
    };

    CHECK(throws_kind(ErrorKind::MissingArtifact, [&] { emit_plotdata(dir.path); }));
    CHECK(no_outputs());

    dir.write(kTrajectoryFile, "");
    CHECK(throws_kind(ErrorKind::MissingArtifact, [&] { emit_plotdata(dir.path); }));
    CHECK(no_outputs());

    dir.write(kTrajectoryFile,
              "time,V,conservation_residual,consensus_residual,overall_residual\n");
    CHECK(throws_kind(ErrorKind::MissingArtifact, [&] { emit_plotdata(dir.path); }));
    CHECK(no_outputs());

    dir.write(kTrajectoryFile,
              "time,V,conservation_residual,consensus_residual,overall_residual\n0,abc,0,0,0\n");
    CHECK(throws_kind(ErrorKind::Parse, [&] { emit_plotdata(dir.path); }));
    CHECK(no_outputs());

    std::ostringstream o, e;
    CHECK(plot_command(dir.path / "absent", o, e) != 0);
    CHECK(e.str().find("missing") != std::string::npos);
}

TEST_CASE("trajectory csv")
{
    Trajectory traj;
    TrajectorySample s;
    s.time = 0.5;
    s.v = 0.25;
    s.residuals.conservation = {1.0, 3.0};
    s.residuals.consensus = {2.0};
    s.residuals.overall = 4.0;
    traj.samples.push_back(s);
    CHECK(trajectory_csv(traj) ==
          "time,V,conservation_residual,consensus_residual,overall_residual\n"
          "0.5,0.25,3,2,4\n");
}

TEST_CASE("verify on a scalar instance")
{
    const VerifyReport r = verify({1, 1, 1});
    CHECK(r.failed == 0);
    CHECK(r.passed == 1);
    CHECK(r.text.find("passed 1/1") != std::string::npos);
    CHECK(r.text.find("trial 0 row m=1 n=1") != std::string::npos);
    CHECK(r.text.find("trial 0 column m=1 n=1") != std::string::npos);

    std::ostringstream o, e;
    CHECK(verify_command({1, 1, 1}, o, e) == 0);
    CHECK(o.str() == r.text);
}

TEST_CASE("verify is deterministic")
{
    const VerifyReport a = verify({6, 4, 3});
    const VerifyReport b = verify({6, 4, 3});
    CHECK(a.text == b.text);
    CHECK(a.failed == 0);
    CHECK(verify({6, 4, 4}).text != a.text);
}
