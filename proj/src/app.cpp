#include "dlayer/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "dlayer/dynamics.hpp"
#include "dlayer/instance_gen.hpp"
#include "dlayer/scenario.hpp"

namespace dlayer {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_short(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << contents;
    if (!out)
        throw Error(ErrorKind::Io, "failed writing " + path.string());
}

json agent_vectors_json(const AgentVectors& v)
{
    json out = json::array();
    for (const auto& cluster : v) {
        json c = json::array();
        for (const Vector& a : cluster)
            c.push_back(a.std());
        out.push_back(std::move(c));
    }
    return out;
}

json residuals_json(const ResidualReport& r)
{
    return {{"conservation", r.conservation},
            {"consensus", r.consensus},
            {"overall", r.overall},
            {"max_conservation", r.max_conservation()},
            {"max_consensus", r.max_consensus()}};
}

json verdict_json(const SpectralVerdict& v)
{
    json eigenvalues = json::array();
    for (const auto& lambda : v.spectrum.eigenvalues)
        eigenvalues.push_back({lambda.real(), lambda.imag()});
    return {{"passed", v.passed()},
            {"real", v.real},
            {"nonpositive", v.nonpositive},
            {"nondefective", v.nondefective},
            {"max_imag", v.max_imag},
            {"max_real", v.max_real},
            {"scale", v.scale},
            {"rank", v.spectrum.rank},
            {"rank_squared", v.spectrum.rank_squared},
            {"eigenvalues", std::move(eigenvalues)}};
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj)
{
    std::ostringstream out;
    out << "time,V,conservation_residual,consensus_residual,overall_residual\n";
    for (const auto& s : traj.samples)
        out << format_number(s.time) << ',' << format_number(s.v) << ','
            << format_number(s.residuals.max_conservation()) << ','
            << format_number(s.residuals.max_consensus()) << ','
            << format_number(s.residuals.overall) << '\n';
    return out.str();
}

void write_run_artifacts(const fs::path& dir, const Partition& part, const SimResult& result,
                         const std::optional<SpectralVerdict>& verdict)
{
    fs::create_directories(dir);

    json summary;
    summary["scheme"] = to_string(part.scheme);
    summary["outcome"] = to_string(result.outcome);
    summary["stationary"] = result.stationary;
    summary["steps"] = result.steps;
    summary["step_size"] = result.step_size;
    summary["final_time"] = result.final_state.time;
    summary["final_derivative_norm"] = result.final_derivative_norm;
    summary["solution"] = result.final_residuals.solution.std();
    summary["reference"] = result.reference.std();
    summary["residuals"] = residuals_json(result.final_residuals);
    summary["final_state"] = {{"x", agent_vectors_json(result.final_state.x)},
                              {"z", agent_vectors_json(result.final_state.z)}};
    try {
        const RateFit fit = fit_convergence_rate(result.trajectory);
        summary["rate_fit"] = {{"slope", fit.slope},
                               {"intercept", fit.intercept},
                               {"r_squared", fit.r_squared},
                               {"samples", fit.samples}};
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientSamples)
            throw;
        summary["rate_fit"] = nullptr;
    }
    summary["spectral"] = verdict ? verdict_json(*verdict) : json(nullptr);

    write_file(dir / kTrajectoryFile, trajectory_csv(result.trajectory));
    write_file(dir / kSummaryFile, summary.dump(2) + "\n");
}

int run_command(const RunOptions& opts, std::ostream& out, std::ostream& err)
{
    try {
        const Scenario sc = load_scenario(opts.scenario);
        const ProblemInstance inst = build_instance(sc, opts.scheme);
        const Partition part = make_partition(inst);
        const SpectralVerdict verdict = check_q_spectrum(assemble_compact(part, inst.topology));
        const SimResult result = integrate(part, inst.topology, sc.sim);

        const fs::path dir = opts.out_dir ? *opts.out_dir : fs::path("out") / opts.scenario.stem();
        write_run_artifacts(dir, part, result, verdict);

        const ResidualReport& r = result.final_residuals;
        out << "scheme " << to_string(part.scheme) << ": " << to_string(result.outcome) << " at t="
            << result.final_state.time << " after " << result.steps << " steps (h=" << result.step_size
            << ")\n"
            << "  conservation " << format_short(r.max_conservation()) << "  consensus "
            << format_short(r.max_consensus()) << "  overall " << format_short(r.overall) << '\n'
            << "  Q spectrum " << (verdict.passed() ? "pass" : "FAIL") << '\n'
            << "  artifacts in " << dir.string() << '\n';
        if (result.outcome != Outcome::Converged) {
            err << "error [" << to_string(ErrorKind::InconsistentOrUnconverged) << "]: "
                << (result.stationary ? "stationary state does not solve Ax=b"
                                      : "no stationary state reached by max_time")
                << '\n';
            return exit_code(ErrorKind::InconsistentOrUnconverged);
        }
        return 0;
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    }
}

// ---------------------------------------------------------------- verify

namespace {

constexpr double kCompactTolerance = 1e-12;
// Horizon of the short convergence run and the number of checkpoints on it.
constexpr double kShortHorizon = 10000.0;
constexpr int kCheckpoints = 20;
// Slack on the monotone decay of the weighted derivative energy.
constexpr double kDecaySlack = 1e-9;

enum class Decay { Converged, Decaying, Failed };

const char* to_string(Decay d)
{
    switch (d) {
    case Decay::Converged: return "converged";
    case Decay::Decaying: return "decaying";
    default: return "FAIL";
    }
}

struct TrialCheck {
    double compact_error = 0.0;
    bool spectrum = false;
    Decay decay = Decay::Failed;
    double final_time = 0.0;
    double overall = 0.0;
};

// W = |dx|^2 + dz' M3 dz for the state derivative (dx, dz) = Q s + drift.
// Since diag(I, M3) Q is symmetric and negative semidefinite, W never grows
// along a trajectory.
double derivative_energy(const CompactSystem& cs, const Matrix& m3, const NetworkState& s)
{
    const Vector f = cs.apply(stack(s));
    const std::size_t nx = cs.a_hat.cols();
    const Vector dx = f.segment(0, nx);
    const Vector dz = f.segment(nx, f.dim() - nx);
    return dx.squared_norm() + dot(dz, m3 * dz);
}

// Short run in checkpoints: stops once converged, otherwise requires W to
// decrease monotonically and strictly overall.
TrialCheck short_run(const Partition& part, const Topology& topo, const CompactSystem& cs)
{
    TrialCheck out;
    const Matrix m3 = lemma_operands(cs).m3;
    SimConfig cfg;
    cfg.record_every = 100;
    NetworkState s = zero_state(part);
    const double w0 = derivative_energy(cs, m3, s);
    double w_prev = w0;
    for (int k = 1; k <= kCheckpoints; ++k) {
        cfg.max_time = kShortHorizon * k / kCheckpoints;
        SimResult res = integrate(part, topo, cfg, std::move(s));
        s = std::move(res.final_state);
        out.final_time = s.time;
        out.overall = res.final_residuals.overall;
        if (res.outcome == Outcome::Converged) {
            out.decay = Decay::Converged;
            return out;
        }
        if (res.stationary)
            return out;  // stationary but not a solution
        const double w = derivative_energy(cs, m3, s);
        if (w > w_prev * (1.0 + kDecaySlack))
            return out;
        w_prev = w;
    }
    out.decay = w_prev < w0 ? Decay::Decaying : Decay::Failed;
    return out;
}

TrialCheck check_instance(const ProblemInstance& inst, Rng& rng)
{
    const Partition part = make_partition(inst);
    const CompactSystem cs = assemble_compact(part, inst.topology);

    const NetworkState probe =
        unstack(part, random_vector(part.stacked_x_dim() + part.stacked_z_dim(), rng));
    const Vector per_agent = stack(agent_update(part, inst.topology, probe));
    const double compact_error = (per_agent - cs.apply(stack(probe))).norm_inf();

    const bool spectrum = check_q_spectrum(cs).passed();

    TrialCheck out;
    try {
        out = short_run(part, inst.topology, cs);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonFiniteState)
            throw;
    }
    out.compact_error = compact_error;
    out.spectrum = spectrum;
    return out;
}

std::string describe(const ProblemInstance& inst)
{
    std::ostringstream s;
    s << "m=" << inst.a.rows() << " n=" << inst.a.cols() << " clusters=" << inst.topology.cluster_count()
      << " agents=[";
    for (std::size_t i = 0; i < inst.topology.cluster_count(); ++i)
        s << (i ? "," : "") << inst.topology.agent_count(i);
    s << ']';
    return s.str();
}

}  // namespace

VerifyReport verify(const VerifyOptions& opts)
{
    if (opts.trials == 0)
        throw Error(ErrorKind::InvalidArgument, "trial count must be positive");
    if (opts.max_dim == 0)
        throw Error(ErrorKind::InvalidArgument, "max dimension must be positive");

    VerifyReport report;
    std::ostringstream text;
    text << "verify trials=" << opts.trials << " max_dim=" << opts.max_dim << " seed=" << opts.seed
         << '\n';
    InstanceLimits limits;
    limits.max_dim = opts.max_dim;
    std::size_t decaying = 0;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        Rng rng(derive_seed(opts.seed, t));
        bool trial_ok = true;
        for (Scheme scheme : {Scheme::Row, Scheme::Column}) {
            const ProblemInstance inst = random_instance(scheme, limits, rng);
            const TrialCheck c = check_instance(inst, rng);
            const bool compact_ok = c.compact_error < kCompactTolerance;
            trial_ok = trial_ok && compact_ok && c.spectrum && c.decay != Decay::Failed;
            if (c.decay == Decay::Decaying)
                ++decaying;
            text << "trial " << t << ' ' << to_string(scheme) << ' ' << describe(inst)
                 << " compact=" << (compact_ok ? "pass" : "FAIL") << '(' << format_short(c.compact_error)
                 << ") spectrum=" << (c.spectrum ? "pass" : "FAIL") << " run=" << to_string(c.decay)
                 << "(t=" << format_short(c.final_time) << ", residual=" << format_short(c.overall)
                 << ")\n";
        }
        trial_ok ? ++report.passed : ++report.failed;
    }
    text << "passed " << report.passed << '/' << opts.trials << " (" << decaying
         << " runs still decaying at t=" << kShortHorizon << ")\n";
    report.text = text.str();
    return report;
}

int verify_command(const VerifyOptions& opts, std::ostream& out, std::ostream& err)
{
    try {
        const VerifyReport report = verify(opts);
        out << report.text;
        return report.failed == 0 ? 0 : 1;
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    }
}

// ---------------------------------------------------------------- plot

void emit_plotdata(const fs::path& run_dir)
{
    const fs::path traj_path = run_dir / kTrajectoryFile;
    std::ifstream in(traj_path);
    if (!in)
        throw Error(ErrorKind::MissingArtifact, "missing " + traj_path.string());

    std::string line;
    if (!std::getline(in, line) || line.rfind("time,V", 0) != 0)
        throw Error(ErrorKind::MissingArtifact, traj_path.string() + " has no trajectory header");
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string t_field, v_field;
        std::getline(row, t_field, ',');
        std::getline(row, v_field, ',');
        try {
            times.push_back(std::stod(t_field));
            values.push_back(std::stod(v_field));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Parse, traj_path.string() + ": malformed row '" + line + "'");
        }
    }
    if (times.empty())
        throw Error(ErrorKind::MissingArtifact, traj_path.string() + " holds an empty trajectory");

    std::optional<RateFit> fit;
    std::string fit_note;
    try {
        fit = fit_convergence_rate(times, values);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientSamples)
            throw;
        fit_note = e.what();
    }

    std::ostringstream csv;
    csv << "time,V,ln_V,fitted_ln_V\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        csv << format_number(times[k]) << ',' << format_number(values[k]) << ',';
        if (values[k] > 0.0)
            csv << format_number(std::log(values[k]));
        csv << ',';
        if (fit)
            csv << format_number(fit->intercept + fit->slope * times[k]);
        csv << '\n';
    }

    json fit_doc;
    if (fit) {
        fit_doc = {{"available", true},
                   {"slope", fit->slope},
                   {"intercept", fit->intercept},
                   {"r_squared", fit->r_squared},
                   {"samples", fit->samples}};
    } else {
        fit_doc = {{"available", false}, {"reason", fit_note}};
    }

    write_file(run_dir / kLnVFile, csv.str());
    write_file(run_dir / kFitFile, fit_doc.dump(2) + "\n");
}

int plot_command(const fs::path& run_dir, std::ostream& out, std::ostream& err)
{
    try {
        emit_plotdata(run_dir);
        out << "wrote " << (run_dir / kLnVFile).string() << " and " << (run_dir / kFitFile).string()
            << '\n';
        return 0;
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    }
}

}  // namespace dlayer
