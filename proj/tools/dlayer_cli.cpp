#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "dlayer/app.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Distributed Ax=b solvers on double-layered networks"};
    app.require_subcommand(1);

    dlayer::RunOptions run_opts;
    std::string out_dir;
    dlayer::Scheme scheme = dlayer::Scheme::Row;
    const std::map<std::string, dlayer::Scheme> schemes{{"row", dlayer::Scheme::Row},
                                                        {"column", dlayer::Scheme::Column}};
    auto* run = app.add_subcommand("run", "Simulate a scenario file and write its artifacts");
    run->add_option("scenario", run_opts.scenario, "Scenario JSON file")->required();
    auto* out_opt = run->add_option("--out", out_dir, "Artifact directory (default out/<stem>)");
    auto* scheme_opt = run->add_option("--scheme", scheme, "Override the scenario's scheme")
                           ->transform(CLI::CheckedTransformer(schemes, CLI::ignore_case));

    dlayer::VerifyOptions verify_opts;
    auto* verify = app.add_subcommand("verify", "Randomized check of both schemes");
    verify->add_option("--trials", verify_opts.trials, "Number of trials")->check(CLI::PositiveNumber);
    verify->add_option("--max-dim", verify_opts.max_dim, "Largest m and n")->check(CLI::PositiveNumber);
    verify->add_option("--seed", verify_opts.seed, "Master seed");

    std::string run_dir;
    auto* plot = app.add_subcommand("plot", "Write ln V(t) plot data for a run directory");
    plot->add_option("run_dir", run_dir, "Directory written by `run`")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help exits 0; usage errors share the parse-error status.
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (*run) {
        if (*out_opt)
            run_opts.out_dir = out_dir;
        if (*scheme_opt)
            run_opts.scheme = scheme;
        return dlayer::run_command(run_opts, std::cout, std::cerr);
    }
    if (*verify)
        return dlayer::verify_command(verify_opts, std::cout, std::cerr);
    return dlayer::plot_command(run_dir, std::cout, std::cerr);
}
