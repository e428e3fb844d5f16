#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "affinehs/cli.hpp"

int main(int argc, char** argv) {
    using affinehs::cli::RunConfig;
    RunConfig cfg;
    CLI::App app{"Affine processes on positive semidefinite matrices: admissibility, Riccati solves, moments, simulation"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--params", cfg.params_path, "parameter file (JSON)")->required();
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--tol", cfg.tol, "admissibility tolerance");
        sub->add_option("--format", cfg.format, "report format: json or csv");
    };
    auto add_time = [&](CLI::App* sub) {
        sub->add_option("--T", cfg.T, "time horizon");
        sub->add_option("--k", cfg.k, "truncation level");
        sub->add_option("--n-out", cfg.n_out, "number of output intervals");
        sub->add_option("--policy", cfg.policy, "cone policy: reject or clip");
    };

    auto* validate = app.add_subcommand("validate", "check admissibility and write admissibility.json");
    add_common(validate);
    validate->add_option("--n-pairs", cfg.n_pairs, "random orthogonal pairs for condition (iv)");

    auto* solve = app.add_subcommand("solve", "solve the Riccati system, write solution.csv and diagnostics.json");
    add_common(solve);
    add_time(solve);
    solve->add_option("--u", cfg.u_path, "u matrix file (default identity)");
    solve->add_flag("--cascade", cfg.cascade, "run the truncation cascade");
    solve->add_option("--k-schedule", cfg.k_schedule, "cascade truncation levels");

    auto* moments = app.add_subcommand("moments", "tabulate mean, second moment, variance and Laplace transform");
    add_common(moments);
    add_time(moments);
    moments->add_option("--x0,--x", cfg.x_path, "initial state file (default identity)");
    moments->add_option("--v", cfg.v_path, "direction v (default identity)");
    moments->add_option("--w", cfg.w_path, "direction w (default v)");
    moments->add_option("--u", cfg.u_path, "Laplace argument (default identity)");

    auto* simulate = app.add_subcommand("simulate", "simulate paths of the truncated process, write paths.csv");
    add_common(simulate);
    add_time(simulate);
    simulate->add_option("--x0", cfg.x_path, "initial state file (default identity)");
    simulate->add_option("--n-paths", cfg.n_paths, "number of paths");
    simulate->add_flag("--record-windows", cfg.record_windows, "also record the state at every window end");

    auto* verify = app.add_subcommand("verify", "compare Monte Carlo against the analytic Laplace transform and moments");
    add_common(verify);
    add_time(verify);
    verify->add_option("--x0", cfg.x_path, "initial state file (default identity)");
    verify->add_option("--u", cfg.u_path, "Laplace argument (default identity/2)");
    verify->add_option("--v", cfg.v_path, "direction v (default identity)");
    verify->add_option("--w", cfg.w_path, "direction w (default E11/2)");
    verify->add_option("--n-paths", cfg.n_paths, "number of paths");
    verify->add_option("--threads", cfg.threads, "simulation workers (0 = hardware; AFFINEHS_THREADS caps)");
    bool fault = false;
    verify->add_flag("--fault-inject", fault, "perturb the Riccati solution by 25% before comparing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : affinehs::cli::kInputError;
    }
    for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
    if (fault) cfg.fault_inject = 0.25;
    return affinehs::cli::run(cfg, std::cout, std::cerr);
}
