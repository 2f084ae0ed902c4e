#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dlayer/dynamics.hpp"
#include "dlayer/graph.hpp"
#include "dlayer/partition.hpp"

namespace dlayer {

enum class InitMode { Zeros, SeededRandom };

struct SimConfig {
    std::optional<double> step_size;  // nullopt selects the automatic step
    double max_time = 200.0;
    double stationarity_tol = 1e-10;  // stop once ||derivative||_inf falls below this
    std::size_t record_every = 10;
    std::uint64_t seed = 0;
    InitMode init = InitMode::Zeros;
    double amplitude = 1.0;           // half-width of the uniform seeded-random init
    // Solution V(t) is measured against. When absent, the reassembled limit of
    // the flow from the start state is used, or the final estimate if the flow
    // has no limit.
    std::optional<Vector> reference;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Throws InvalidArgument for non-positive step, horizon, tolerance, amplitude or record_every.
void validate(const SimConfig& cfg);

struct TrajectorySample {
    double time = 0.0;
    double v = 0.0;
    ResidualReport residuals;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
};

enum class Outcome { Converged, InconsistentOrUnconverged };

const char* to_string(Outcome o) noexcept;

// Residual bound a stationary state must meet to count as a solution.
inline constexpr double kValidityTolerance = 1e-6;

struct SimResult {
    Trajectory trajectory;
    NetworkState final_state;
    ResidualReport final_residuals;
    Vector reference;            // what V(t) was measured against
    double step_size = 0.0;
    std::size_t steps = 0;
    bool stationary = false;
    double final_derivative_norm = 0.0;
    Outcome outcome = Outcome::InconsistentOrUnconverged;
};

// Largest absolute row sum of the compact drift matrix, an upper bound on its
// spectral radius.
double gershgorin_bound(const Partition& part, const Topology& topo);

// 0.9 * 2 / gershgorin_bound, capped at 0.1.
double auto_step_size(const Partition& part, const Topology& topo);

NetworkState initial_state(const Partition& part, const SimConfig& cfg);

// Integrates the per-agent flows with classical fixed-step RK4 until the
// derivative becomes stationary or max_time is reached. Throws NonFiniteState
// if the state blows up.
SimResult integrate(const Partition& part, const Topology& topo, const SimConfig& cfg);
SimResult integrate(const Partition& part, const Topology& topo, const SimConfig& cfg,
                    NetworkState start);

// One RK4 step of size h using only per-agent updates.
NetworkState rk4_step(const Partition& part, const Topology& topo, const NetworkState& s, double h);

// Row: 1/2 sum_i ||x_i - x*||^2 over cluster stacks.
// Column: 1/2 sum_ij ||x_ij - x*_i||^2 with x*_i the i-th column band of x*.
double closeness_metric(const NetworkState& s, const Vector& x_star, const Partition& part);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t samples = 0;
};

// V values at or below this are treated as converged and left out of the fit.
inline constexpr double kFitFloor = 1e-14;

// Least-squares line through (t, ln V) from the first sample to the last
// sample with V > kFitFloor. Throws InsufficientSamples with fewer than ten
// usable samples.
RateFit fit_convergence_rate(const Trajectory& traj);
RateFit fit_convergence_rate(std::span<const double> times, std::span<const double> values);

}  // namespace dlayer
