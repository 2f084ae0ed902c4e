#include "dlayer/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "dlayer/spectral.hpp"

namespace dlayer {

const char* to_string(Outcome o) noexcept
{
    return o == Outcome::Converged ? "converged" : "inconsistent_or_unconverged";
}

void validate(const SimConfig& cfg)
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
    };
    if (cfg.step_size)
        positive(*cfg.step_size, "step_size");
    positive(cfg.max_time, "max_time");
    positive(cfg.stationarity_tol, "stationarity_tol");
    positive(cfg.amplitude, "amplitude");
    if (cfg.record_every == 0)
        throw Error(ErrorKind::InvalidArgument, "record_every must be positive");
}

double gershgorin_bound(const Partition& part, const Topology& topo)
{
    const Matrix q = assemble_compact(part, topo).q;
    double bound = 0.0;
    for (std::size_t r = 0; r < q.rows(); ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < q.cols(); ++c)
            row += std::abs(q(r, c));
        bound = std::max(bound, row);
    }
    return bound;
}

double auto_step_size(const Partition& part, const Topology& topo)
{
    constexpr double kCap = 0.1;
    const double rho = gershgorin_bound(part, topo);
    if (rho <= 0.0)
        return kCap;
    return std::min(kCap, 0.9 * 2.0 / rho);
}

NetworkState initial_state(const Partition& part, const SimConfig& cfg)
{
    NetworkState s = zero_state(part);
    if (cfg.init == InitMode::Zeros)
        return s;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-cfg.amplitude, cfg.amplitude);
    for (auto* layer : {&s.x, &s.z})
        for (auto& cluster : *layer)
            for (Vector& v : cluster)
                for (double& e : v.values())
                    e = dist(rng);
    return s;
}

namespace {

using Flat = std::vector<double>;

double max_abs(const Flat& v)
{
    double m = 0.0;
    for (double e : v)
        m = std::max(m, std::abs(e));
    return m;
}

bool finite(const Flat& v)
{
    return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

// Classical RK4 on the stacked state; k1 = f(y) is supplied by the caller.
class Rk4 {
public:
    explicit Rk4(const AgentNetwork& net)
        : net_(net), k2_(net.state_dim()), k3_(net.state_dim()), k4_(net.state_dim()),
          tmp_(net.state_dim())
    {
    }

    void step(Flat& y, const Flat& k1, double h)
    {
        stage(y, k1, 0.5 * h, k2_);
        stage(y, k2_, 0.5 * h, k3_);
        stage(y, k3_, h, k4_);
        const double w = h / 6.0;
        for (std::size_t k = 0; k < y.size(); ++k)
            y[k] += w * (k1[k] + 2.0 * k2_[k] + 2.0 * k3_[k] + k4_[k]);
    }

private:
    void stage(const Flat& y, const Flat& slope, double h, Flat& out)
    {
        for (std::size_t k = 0; k < y.size(); ++k)
            tmp_[k] = y[k] + h * slope[k];
        net_.evaluate(tmp_, out);
    }

    const AgentNetwork& net_;
    Flat k2_, k3_, k4_, tmp_;
};

}  // namespace

NetworkState rk4_step(const Partition& part, const Topology& topo, const NetworkState& s, double h)
{
    require_shape(part, s);
    const AgentNetwork net(part, topo);
    Flat y = stack(s).std();
    Flat k1(y.size());
    net.evaluate(y, k1);
    Rk4(net).step(y, k1, h);
    return unstack(part, Vector(std::move(y)), s.time + h);
}

SimResult integrate(const Partition& part, const Topology& topo, const SimConfig& cfg)
{
    return integrate(part, topo, cfg, initial_state(part, cfg));
}

SimResult integrate(const Partition& part, const Topology& topo, const SimConfig& cfg,
                    NetworkState start)
{
    validate(cfg);
    require_compatible(part, topo);
    require_shape(part, start);
    if (cfg.reference && cfg.reference->dim() != part.cols)
        throw Error(ErrorKind::ShapeMismatch, "reference solution has dimension " +
                                                  std::to_string(cfg.reference->dim()) +
                                                  ", expected " + std::to_string(part.cols));

    SimResult res;
    res.step_size = cfg.step_size ? *cfg.step_size : auto_step_size(part, topo);
    const double h = res.step_size;
    const double t0 = start.time;

    const AgentNetwork net(part, topo);
    Rk4 rk4(net);
    Flat y = stack(start).std();
    Flat k1(y.size());
    double t = t0;

    // States are kept until the reference is known; V is filled in at the end.
    std::vector<NetworkState> recorded;
    auto record = [&] {
        NetworkState s = unstack(part, Vector(y), t);
        TrajectorySample sample;
        sample.time = t;
        sample.residuals = residuals(part, topo, s);
        res.trajectory.samples.push_back(std::move(sample));
        recorded.push_back(std::move(s));
    };

    bool recorded_current = false;
    for (;;) {
        net.evaluate(y, k1);
        res.final_derivative_norm = max_abs(k1);
        if (res.steps % cfg.record_every == 0) {
            record();
            recorded_current = true;
        }
        if (res.final_derivative_norm < cfg.stationarity_tol) {
            res.stationary = true;
            break;
        }
        if (t >= cfg.max_time)
            break;

        const double next_time =
            std::min(cfg.max_time, t0 + static_cast<double>(res.steps + 1) * h);
        rk4.step(y, k1, next_time - t);
        t = next_time;
        ++res.steps;
        recorded_current = false;
        if (!finite(y)) {
            std::ostringstream msg;
            msg << "state became non-finite at t=" << t << " (step size " << h << ")";
            throw Error(ErrorKind::NonFiniteState, msg.str());
        }
    }
    if (!recorded_current)
        record();

    NetworkState s = recorded.back();
    res.final_residuals = residuals(part, topo, s);
    if (cfg.reference) {
        res.reference = *cfg.reference;
    } else {
        // Where the flow provably ends up, or the final estimate when it has no limit.
        const auto limit = flow_limit(assemble_compact(part, topo), part, stack(recorded.front()));
        res.reference = limit ? reassembled_solution(part, unstack(part, *limit))
                              : res.final_residuals.solution;
    }
    for (std::size_t k = 0; k < recorded.size(); ++k)
        res.trajectory.samples[k].v = closeness_metric(recorded[k], res.reference, part);

    res.outcome = res.stationary && res.final_residuals.within(kValidityTolerance)
                      ? Outcome::Converged
                      : Outcome::InconsistentOrUnconverged;
    res.final_state = std::move(s);
    return res;
}

double closeness_metric(const NetworkState& s, const Vector& x_star, const Partition& part)
{
    require_shape(part, s);
    if (x_star.dim() != part.cols)
        throw Error(ErrorKind::ShapeMismatch, "reference solution has dimension " +
                                                  std::to_string(x_star.dim()) + ", expected " +
                                                  std::to_string(part.cols));
    double v = 0.0;
    if (part.scheme == Scheme::Row) {
        for (const Vector& stacked : cluster_relay(part, s))
            v += (stacked - x_star).squared_norm();
    } else {
        for (std::size_t i = 0; i < part.cluster_count(); ++i) {
            const Vector target = x_star.segment(part.clusters[i].offset, part.clusters[i].size);
            for (const Vector& x : s.x[i])
                v += (x - target).squared_norm();
        }
    }
    return 0.5 * v;
}

RateFit fit_convergence_rate(const Trajectory& traj)
{
    std::vector<double> t, v;
    t.reserve(traj.samples.size());
    v.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        t.push_back(s.time);
        v.push_back(s.v);
    }
    return fit_convergence_rate(t, v);
}

RateFit fit_convergence_rate(std::span<const double> times, std::span<const double> values)
{
    if (times.size() != values.size())
        throw Error(ErrorKind::ShapeMismatch, "times and values differ in length");

    std::size_t last = values.size();
    for (std::size_t k = values.size(); k-- > 0;)
        if (values[k] > kFitFloor) {
            last = k;
            break;
        }

    std::vector<double> t, y;
    if (last != values.size())
        for (std::size_t k = 0; k <= last; ++k)
            if (values[k] > kFitFloor) {
                t.push_back(times[k]);
                y.push_back(std::log(values[k]));
            }
    if (t.size() < 10)
        throw Error(ErrorKind::InsufficientSamples,
                    "need at least 10 samples with V > 1e-14, have " + std::to_string(t.size()));

    const double n = static_cast<double>(t.size());
    double t_mean = 0.0, y_mean = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        t_mean += t[k];
        y_mean += y[k];
    }
    t_mean /= n;
    y_mean /= n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        stt += (t[k] - t_mean) * (t[k] - t_mean);
        sty += (t[k] - t_mean) * (y[k] - y_mean);
        syy += (y[k] - y_mean) * (y[k] - y_mean);
    }
    if (stt == 0.0)
        throw Error(ErrorKind::InsufficientSamples, "all samples share one time value");

    RateFit fit;
    fit.samples = t.size();
    fit.slope = sty / stt;
    fit.intercept = y_mean - fit.slope * t_mean;
    double sse = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double e = y[k] - (fit.intercept + fit.slope * t[k]);
        sse += e * e;
    }
    // A flat series is fit exactly by a flat line.
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

}  // namespace dlayer
