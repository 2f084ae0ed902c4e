#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dlayer/simulator.hpp"
#include "dlayer/spectral.hpp"
#include "support.hpp"

using namespace dlayer;
using testing::max_diff;
using testing::throws_kind;

namespace {

struct Net {
    Partition part;
    Topology topo;
};

Net build(const ProblemInstance& inst)
{
    return {make_partition(inst), inst.topology};
}

}  // namespace

TEST_CASE("single agent converges to the scalar solution")
{
    for (Scheme scheme : {Scheme::Row, Scheme::Column}) {
        const Net net = build(testing::scalar_instance(scheme));
        const SimResult r = integrate(net.part, net.topo, SimConfig{});
        CHECK(r.stationary);
        CHECK(r.outcome == Outcome::Converged);
        CHECK(r.final_state.x[0][0][0] == doctest::Approx(2.0).epsilon(1e-10));
        // r(t) = -4 exp(-4t) and z integrates it with no peers to pull it back.
        CHECK(r.final_state.z[0][0][0] == doctest::Approx(-1.0).epsilon(1e-10));
        CHECK(max_diff(r.reference, Vector{2.0}) < 1e-12);
        CHECK(r.final_residuals.overall < 1e-9);
    }
}

TEST_CASE("one RK4 step against the closed form")
{
    // x(t) = 2 - 2 exp(-4t) from rest; RK4 replaces exp(z) by its quartic Taylor polynomial.
    const Net net = build(testing::scalar_instance(Scheme::Row));
    const NetworkState s = rk4_step(net.part, net.topo, zero_state(net.part), 0.01);
    const double z = -0.04;
    const double taylor = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
    CHECK(s.time == doctest::Approx(0.01));
    CHECK(std::abs(s.x[0][0][0] - (2.0 - 2.0 * taylor)) < 1e-15);
    CHECK(std::abs(s.z[0][0][0] - (taylor - 1.0)) < 1e-15);
    CHECK(std::abs(s.x[0][0][0] - (2.0 - 2.0 * std::exp(z))) < 2e-9);
}

TEST_CASE("equilibrium start stays put")
{
    Rng rng(5);
    for (Scheme scheme : {Scheme::Row, Scheme::Column}) {
        const Net net = build(random_instance(scheme, InstanceLimits{}, rng));
        const CompactSystem cs = assemble_compact(net.part, net.topo);
        const NetworkState start = unstack(net.part, equilibrium_certificate(cs, net.part).stacked());
        SimConfig cfg;
        cfg.stationarity_tol = 1e-8;
        const SimResult r = integrate(net.part, net.topo, cfg, start);
        CHECK(r.stationary);
        CHECK(r.steps == 0);
        REQUIRE(r.trajectory.samples.size() == 1);
        CHECK(r.trajectory.samples[0].v <= 1e-12);
    }
}

TEST_CASE("random instance over three clusters")
{
    Rng rng(60);
    // Diagonal shift keeps the slowest mode fast enough for a short horizon.
    Matrix a = random_matrix(6, 5, rng);
    for (std::size_t k = 0; k < 5; ++k)
        a(k, k) += 2.0;
    const Vector x_true = random_vector(5, rng);
    for (Scheme scheme : {Scheme::Row, Scheme::Column}) {
        const Layout layout = scheme == Scheme::Row ? Layout{{2, 2, 2}, {{2, 3}, {5}, {1, 1, 3}}}
                                                    : Layout{{2, 2, 1}, {{3, 3}, {6}, {1, 2, 3}}};
        const Net net = build(testing::make_instance(scheme, a, a * x_true, layout));
        SimConfig cfg;
        cfg.max_time = 5000.0;
        const SimResult r = integrate(net.part, net.topo, cfg);
        CHECK(r.outcome == Outcome::Converged);
        CHECK(r.final_residuals.within(1e-6));
        CHECK(max_diff(r.final_residuals.solution, x_true) < 1e-6);
        CHECK(r.trajectory.samples.back().v < 1e-8 * r.trajectory.samples.front().v);

        const RateFit fit = fit_convergence_rate(r.trajectory);
        CHECK(fit.slope < 0.0);
    }
}

TEST_CASE("integration is deterministic")
{
    Rng rng(19);
    const Net net = build(random_instance(Scheme::Column, InstanceLimits{}, rng));
    SimConfig cfg;
    cfg.init = InitMode::SeededRandom;
    cfg.seed = 42;
    cfg.max_time = 50.0;
    const SimResult a = integrate(net.part, net.topo, cfg);
    const SimResult b = integrate(net.part, net.topo, cfg);
    REQUIRE(a.trajectory.samples.size() == b.trajectory.samples.size());
    for (std::size_t k = 0; k < a.trajectory.samples.size(); ++k) {
        CHECK(a.trajectory.samples[k].time == b.trajectory.samples[k].time);
        CHECK(a.trajectory.samples[k].v == b.trajectory.samples[k].v);
    }
    CHECK(a.final_state == b.final_state);

    const NetworkState first = initial_state(net.part, cfg);
    cfg.seed = 43;
    CHECK_FALSE(initial_state(net.part, cfg) == first);
}

TEST_CASE("seeded random initial state")
{
    const Net net = build(testing::scalar_instance(Scheme::Row));
    SimConfig cfg;
    CHECK(initial_state(net.part, cfg) == zero_state(net.part));
    cfg.init = InitMode::SeededRandom;
    cfg.amplitude = 0.25;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        const NetworkState s = initial_state(net.part, cfg);
        CHECK(std::abs(s.x[0][0][0]) <= 0.25);
        CHECK(std::abs(s.z[0][0][0]) <= 0.25);
    }
}

TEST_CASE("closeness metric")
{
    const auto row_inst = testing::make_instance(Scheme::Row, Matrix::identity(2), Vector{1.0, 1.0},
                                                 Layout{{1, 1}, {{1, 1}, {2}}});
    const Partition row = make_partition(row_inst);
    NetworkState s = zero_state(row);
    // Cluster stacks (0, 0) and (0, 0) against (1, 1): 1/2 (2 + 2).
    CHECK(closeness_metric(s, Vector{1.0, 1.0}, row) == doctest::Approx(2.0));
    s.x[1][0] = Vector{1.0, 1.0};
    CHECK(closeness_metric(s, Vector{1.0, 1.0}, row) == doctest::Approx(1.0));
    CHECK(throws_kind(ErrorKind::ShapeMismatch, [&] { closeness_metric(s, Vector{1.0}, row); }));

    const auto col_inst = testing::make_instance(Scheme::Column, Matrix::identity(2),
                                                 Vector{1.0, 1.0}, Layout{{1, 1}, {{1, 1}, {2}}});
    const Partition col = make_partition(col_inst);
    NetworkState c = zero_state(col);
    // Three agent copies of a scalar band: 1/2 (1 + 1 + 4).
    CHECK(closeness_metric(c, Vector{1.0, 2.0}, col) == doctest::Approx(3.0));
}

TEST_CASE("automatic step size")
{
    const Net scalar = build(testing::scalar_instance(Scheme::Row));
    CHECK(gershgorin_bound(scalar.part, scalar.topo) == doctest::Approx(4.0));
    CHECK(auto_step_size(scalar.part, scalar.topo) == 0.1);

    Rng rng(1);
    InstanceLimits limits;
    limits.min_dim = 8;
    limits.min_clusters = 3;
    const Net big = build(random_instance(Scheme::Row, limits, rng));
    const double rho = gershgorin_bound(big.part, big.topo);
    CHECK(rho > 4.0);
    CHECK(auto_step_size(big.part, big.topo) == doctest::Approx(std::min(0.1, 1.8 / rho)));
    CHECK(auto_step_size(big.part, big.topo) * rho <= 1.8 * (1.0 + 1e-15));
}

TEST_CASE("a huge manual step blows up")
{
    const Net net = build(testing::scalar_instance(Scheme::Row));
    SimConfig cfg;
    cfg.step_size = 10.0;
    cfg.max_time = 1e5;
    CHECK(throws_kind(ErrorKind::NonFiniteState, [&] { integrate(net.part, net.topo, cfg); }));
}

TEST_CASE("invalid configurations")
{
    const Net net = build(testing::scalar_instance(Scheme::Row));
    auto rejects = [&](SimConfig cfg) {
        return throws_kind(ErrorKind::InvalidArgument, [&] { integrate(net.part, net.topo, cfg); });
    };
    SimConfig cfg;
    cfg.step_size = 0.0;
    CHECK(rejects(cfg));
    cfg = SimConfig{};
    cfg.max_time = -1.0;
    CHECK(rejects(cfg));
    cfg = SimConfig{};
    cfg.stationarity_tol = 0.0;
    CHECK(rejects(cfg));
    cfg = SimConfig{};
    cfg.record_every = 0;
    CHECK(rejects(cfg));
    cfg = SimConfig{};
    cfg.amplitude = -2.0;
    CHECK(rejects(cfg));

    cfg = SimConfig{};
    cfg.reference = Vector{1.0, 2.0};
    CHECK(throws_kind(ErrorKind::ShapeMismatch, [&] { integrate(net.part, net.topo, cfg); }));
}

TEST_CASE("horizon without stationarity is unconverged")
{
    const Net net = build(testing::scalar_instance(Scheme::Row));
    SimConfig cfg;
    cfg.max_time = 0.5;
    cfg.record_every = 1;
    const SimResult r = integrate(net.part, net.topo, cfg);
    CHECK_FALSE(r.stationary);
    CHECK(r.outcome == Outcome::InconsistentOrUnconverged);
    CHECK(r.trajectory.samples.back().time == 0.5);
    CHECK(r.steps == 5);
}

TEST_CASE("inconsistent systems stall away from a solution")
{
    const auto inst = testing::make_instance(Scheme::Row, Matrix{{1.0}, {1.0}}, Vector{0.0, 1.0},
                                             Layout{{1, 1}, {{1}, {1}}});
    const Net net = build(inst);
    SimConfig cfg;
    cfg.max_time = 2000.0;
    const SimResult r = integrate(net.part, net.topo, cfg);
    CHECK(r.outcome == Outcome::InconsistentOrUnconverged);
    CHECK(r.final_residuals.max_conservation() > 1e-3);
}

TEST_CASE("rate fit")
{
    std::vector<double> t, v;
    for (int k = 0; k <= 20; ++k) {
        t.push_back(0.1 * k);
        v.push_back(5.0 * std::exp(-3.0 * 0.1 * k));
    }
    const RateFit fit = fit_convergence_rate(t, v);
    CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));
    CHECK(fit.r_squared > 0.9999);
    CHECK(fit.samples == 21);

    // Samples at the floor after the decay are left out.
    t.push_back(2.1);
    v.push_back(0.0);
    CHECK(fit_convergence_rate(t, v).samples == 21);

    const std::vector<double> flat(12, 0.5);
    std::vector<double> ft(12);
    for (std::size_t k = 0; k < ft.size(); ++k)
        ft[k] = static_cast<double>(k);
    const RateFit level = fit_convergence_rate(ft, flat);
    CHECK(level.slope == 0.0);
    CHECK(level.r_squared == 1.0);

    const std::vector<double> few{1.0, 0.5, 0.25};
    const std::vector<double> few_t{0.0, 1.0, 2.0};
    CHECK(throws_kind(ErrorKind::InsufficientSamples, [&] { fit_convergence_rate(few_t, few); }));
    const std::vector<double> tiny(12, 1e-15);
    CHECK(throws_kind(ErrorKind::InsufficientSamples, [&] { fit_convergence_rate(ft, tiny); }));
    CHECK(throws_kind(ErrorKind::ShapeMismatch, [&] { fit_convergence_rate(few_t, flat); }));
}
