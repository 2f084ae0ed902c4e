#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dlayer/partition.hpp"
#include "dlayer/simulator.hpp"
#include "dlayer/spectral.hpp"

namespace dlayer {

// ---- run

struct RunOptions {
    std::filesystem::path scenario;
    std::optional<std::filesystem::path> out_dir;  // default: ./out/<scenario stem>/
    std::optional<Scheme> scheme;                  // overrides the scenario's scheme
};

// Exit status: 0 converged and valid, 2 parse, 3 topology, 4 divergence,
// 5 inconsistent or unconverged.
int run_command(const RunOptions& opts, std::ostream& out, std::ostream& err);

inline constexpr const char* kTrajectoryFile = "trajectory.csv";
inline constexpr const char* kSummaryFile = "summary.json";

// Writes trajectory.csv (time,V,conservation_residual,consensus_residual,
// overall_residual) and summary.json into dir.
void write_run_artifacts(const std::filesystem::path& dir, const Partition& part,
                         const SimResult& result, const std::optional<SpectralVerdict>& verdict);

std::string trajectory_csv(const Trajectory& traj);

// ---- verify

struct VerifyOptions {
    std::size_t trials = 100;
    std::size_t max_dim = 8;
    std::uint64_t seed = 1;
};

struct VerifyReport {
    std::string text;
    std::size_t passed = 0;
    std::size_t failed = 0;
};

// Randomized property suite over both schemes: compact-form equivalence,
// Q spectrum, and a convergence run per trial.
VerifyReport verify(const VerifyOptions& opts);

int verify_command(const VerifyOptions& opts, std::ostream& out, std::ostream& err);

// ---- plot

inline constexpr const char* kLnVFile = "lnv.csv";
inline constexpr const char* kFitFile = "fit.json";

// Reads trajectory.csv from a run directory and writes lnv.csv (time, V,
// ln V, fitted ln V) and fit.json. Writes nothing when the trajectory is
// missing or empty.
void emit_plotdata(const std::filesystem::path& run_dir);

int plot_command(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

}  // namespace dlayer
