#pragma once

// Subcommands of the affinehs tool. Each takes a RunConfig, writes its
// outputs, and returns the exit code: 0 success, 1 numeric or check failure,
// 2 input error.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "affinehs/errors.hpp"
#include "affinehs/io.hpp"
#include "affinehs/moments.hpp"
#include "affinehs/params.hpp"
#include "affinehs/pdmpsim.hpp"
#include "affinehs/riccati.hpp"

namespace affinehs::cli {

enum ExitCode { kOk = 0, kFailure = 1, kInputError = 2 };

struct RunConfig {
    std::string subcommand;
    std::string params_path;
    std::string out = ".";
    std::uint64_t seed = 1;
    double tol = 1e-9;
    std::string format = "json";

    // matrix files; empty selects the documented default
    std::string u_path, x_path, v_path, w_path;
    double T = 1.0;
    std::optional<int> k;
    bool cascade = false;
    std::string policy = "reject";
    std::vector<int> k_schedule = {1, 2, 4, 8, 16, 32, 64};
    int n_out = 20;
    int n_pairs = 200;
    long n_paths = 20000;
    int threads = 0;
    bool record_windows = false;
    double fault_inject = 0.0;  // relative perturbation of ψ in verify (0 = off)
};

inline void check_config(const RunConfig& c) {
    if (c.params_path.empty()) throw InputError("--params is required");
    if (!(c.T >= 0) || !std::isfinite(c.T)) throw InputError("--T must be finite and nonnegative");
    if (!(c.tol > 0)) throw InputError("--tol must be positive");
    if (c.format != "json" && c.format != "csv") throw InputError("--format must be json or csv");
    if (c.policy != "reject" && c.policy != "clip") throw InputError("--policy must be reject or clip");
    if (c.k && *c.k < 1) throw InputError("--k must be >= 1");
    if (c.n_out < 1) throw InputError("--n-out must be >= 1");
    if (c.n_pairs < 1) throw InputError("--n-pairs must be >= 1");
}

inline std::string out_path(const RunConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.out);
    return (std::filesystem::path(c.out) / name).string();
}

inline SymMatrix matrix_arg(const std::string& path, const std::string& what, const SymMatrix& fallback) {
    if (path.empty()) return fallback;
    const SymMatrix m = io::sym_from_json(io::parse_json(io::read_file(path)), what, fallback.dim());
    if (!is_psd(m, default_cone_tol(m))) throw InputError(what + " must be positive semidefinite");
    return m;
}

inline RiccatiOptions riccati_options(const RunConfig& c) {
    RiccatiOptions o;
    o.policy = c.policy == "clip" ? ConePolicy::clip_and_log : ConePolicy::reject_step;
    o.output_points = c.n_out;
    o.k_schedule = c.k_schedule;
    return o;
}

/// Indented JSON with a trailing newline.
inline std::string dump(const io::json& j) { return j.dump(2) + "\n"; }

inline int cmd_validate(const RunConfig& c, std::ostream& log) {
    check_config(c);
    const ParameterSet p = io::read_params(c.params_path);
    const AdmissibilityReport rep = validate_admissibility(p, c.tol, c.n_pairs, c.seed);
    io::write_file(out_path(c, "admissibility.json"), dump(io::to_json(rep)));
    for (const auto& cond : rep.conditions)
        log << (cond.pass ? "pass " : "FAIL ") << cond.id << "  " << cond.description
            << (cond.pass ? "" : "  (violation " + io::fmt(cond.violation) + ")") << "\n";
    return rep.all_pass() ? kOk : kFailure;
}

inline int cmd_solve(const RunConfig& c, std::ostream& log) {
    check_config(c);
    const ParameterSet p = io::read_params(c.params_path);
    const SymMatrix u = matrix_arg(c.u_path, "u", SymMatrix::identity(p.dim));
    const RiccatiOptions opts = riccati_options(c);
    io::json diag;
    RiccatiSolution sol;
    if (c.cascade) {
        CascadeResult res = solve_cascade(p, u, c.T, opts);
        io::write_file(out_path(c, "cascade.json"), dump(io::to_json(res.diagnostics)));
        diag["cascade"] = io::to_json(res.diagnostics);
        sol = res.limit ? *res.limit : res.solution;
        for (const auto& l : res.diagnostics.levels) log << "k=" << l.k << " residual " << io::fmt(l.residual) << "\n";
    } else {
        sol = solve_riccati(p, u, c.T, opts, c.k);
    }
    diag["k"] = sol.k ? io::json(*sol.k) : io::json("limit");
    if (sol.cascade_residual) diag["cascade_residual"] = *sol.cascade_residual;
    diag["T"] = c.T;
    diag["solver"] = io::to_json(sol.diagnostics);
    diag["final_phi"] = sol.final().phi;
    diag["final_psi"] = io::to_json(sol.final().psi);
    io::write_file(out_path(c, "solution.csv"), io::solution_csv(sol));
    io::write_file(out_path(c, "diagnostics.json"), dump(diag));
    log << "phi(T) = " << io::fmt(sol.final().phi) << ", " << sol.diagnostics.accepted_steps << " steps\n";
    return kOk;
}

inline int cmd_moments(const RunConfig& c, std::ostream& log) {
    check_config(c);
    ParameterSet p = io::read_params(c.params_path);
    if (c.k) p = truncate(p, *c.k);
    const int d = p.dim;
    const SymMatrix x = matrix_arg(c.x_path, "x", SymMatrix::identity(d));
    const SymMatrix v = matrix_arg(c.v_path, "v", SymMatrix::identity(d));
    const SymMatrix w = matrix_arg(c.w_path, "w", v);
    const SymMatrix u = matrix_arg(c.u_path, "u", SymMatrix::identity(d));
    const MomentEngine eng(p);
    RiccatiOptions opts = riccati_options(c);
    const RiccatiSolution sol = solve_riccati(p, u, c.T, opts);
    io::json j;
    io::json ts = io::json::array(), means = io::json::array(), seconds = io::json::array(), vars = io::json::array(),
             laps = io::json::array();
    std::string csv = "t,mean,second_moment,variance,laplace\n";
    for (int i = 0; i <= c.n_out; ++i) {
        const double t = i == c.n_out ? c.T : c.T * i / c.n_out;
        const double mv = eng.mean(x, t, v);
        const double s2 = eng.second_moment(x, t, v, w);
        const double var = eng.covariance(x, t, v, v);
        const auto [phi, psi] = sol.at(t);
        const double lap = std::exp(-phi - inner(x, psi));
        ts.push_back(t);
        means.push_back(mv);
        seconds.push_back(s2);
        vars.push_back(var);
        laps.push_back(lap);
        csv += io::fmt(t) + "," + io::fmt(mv) + "," + io::fmt(s2) + "," + io::fmt(var) + "," + io::fmt(lap) + "\n";
    }
    j["t"] = ts;
    j["mean"] = means;
    j["second_moment"] = seconds;
    j["variance"] = vars;
    j["laplace"] = laps;
    if (c.format == "csv")
        io::write_file(out_path(c, "moments.csv"), csv);
    else
        io::write_file(out_path(c, "moments.json"), dump(j));
    log << "mean(T) = " << io::fmt(means.back().get<double>()) << "\n";
    return kOk;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& log) {
    check_config(c);
    ParameterSet p = io::read_params(c.params_path);
    if (c.k) p = truncate(p, *c.k);
    if (!finite_activity(p)) throw InputError("simulate: infinite-activity parameters, pass --k");
    if (c.n_paths < 1) throw InputError("--n-paths must be >= 1");
    const SymMatrix x0 = matrix_arg(c.x_path, "x0", SymMatrix::identity(p.dim));
    SimOptions so;
    so.record_windows = c.record_windows;
    const Simulator sim(p, so);
    std::string csv = io::paths_csv_header(p.dim);
    long jumps = 0;
    for (long i = 0; i < c.n_paths; ++i) {
        CounterRng rng = CounterRng::stream(c.seed, static_cast<std::uint64_t>(i));
        const SimPath path = sim.simulate(x0, c.T, rng);
        jumps += path.n_jumps;
        csv += io::paths_csv_rows(i, path);
    }
    const std::string target = c.out.size() > 4 && c.out.substr(c.out.size() - 4) == ".csv"
                                   ? c.out
                                   : out_path(c, "paths.csv");
    io::write_file(target, csv);
    log << c.n_paths << " paths, " << jumps << " jumps\n";
    return kOk;
}

struct VerifyCheck {
    std::string name;
    double analytic;
    double mc;
    double se;
    double z;
    bool pass;
};

inline double z_score(double analytic, double mc, double se) {
    const double diff = mc - analytic;
    if (se > 0) return diff / se;
    return std::abs(diff) <= 1e-9 * (1.0 + std::abs(analytic)) ? 0.0 : (diff > 0 ? kInf : -kInf);
}

/**
 * validate → truncate → solve → moments → simulate → compare. Every check is
 * a z-score of the Monte Carlo estimate against the analytic value; the run
 * passes when all |z| ≤ 3. The report holds no timing, so it is bitwise
 * reproducible for a fixed seed and any worker count.
 */
inline int cmd_verify(const RunConfig& c, std::ostream& log) {
    check_config(c);
    std::string stage = "validate";
    io::json report;
    try {
        const ParameterSet p = io::read_params(c.params_path);
        const AdmissibilityReport adm = validate_admissibility(p, c.tol, c.n_pairs, c.seed);
        report["admissible"] = adm.all_pass();
        if (!adm.all_pass()) {
            report["failed_stage"] = stage;
            io::write_file(out_path(c, "verify.json"), dump(report));
            log << "stage validate: parameters not admissible\n";
            return kFailure;
        }
        stage = "truncate";
        const int k = c.k.value_or(16);
        const ParameterSet pk = truncate(p, k);
        const int d = p.dim;
        const SymMatrix x0 = matrix_arg(c.x_path, "x0", SymMatrix::identity(d));
        const SymMatrix u = matrix_arg(c.u_path, "u", 0.5 * SymMatrix::identity(d));
        const SymMatrix v = matrix_arg(c.v_path, "v", SymMatrix::identity(d));
        const SymMatrix w = matrix_arg(c.w_path, "w", SymMatrix::unit(d, 0, 0) * 0.5);

        stage = "solve";
        const RiccatiSolution sol = solve_riccati(pk, u, c.T, riccati_options(c));
        double phi = sol.final().phi;
        SymMatrix psi = sol.final().psi;
        if (c.fault_inject != 0.0) {
            phi *= 1.0 + c.fault_inject;
            psi *= 1.0 + c.fault_inject;
        }
        const double lap = std::exp(-phi - inner(x0, psi));

        stage = "moments";
        const MomentEngine eng(pk);
        const double mean_v = eng.mean(x0, c.T, v);
        const double mean_w = eng.mean(x0, c.T, w);
        const double m2_vw = eng.second_moment(x0, c.T, v, w);
        const double m2_vv = eng.second_moment(x0, c.T, v, v);

        stage = "simulate";
        if (c.n_paths < 100) throw InputError("--n-paths must be >= 100 for verify");
        SimOptions so;
        so.record_events = false;
        const Simulator sim(pk, so);
        const std::vector<PathFunctional> fs = {
            [&](const SymMatrix& x) { return std::exp(-inner(x, u)); },
            [&](const SymMatrix& x) { return inner(x, v); },
            [&](const SymMatrix& x) { return inner(x, w); },
            [&](const SymMatrix& x) { return inner(x, v) * inner(x, w); },
            [&](const SymMatrix& x) { return inner(x, v) * inner(x, v); },
        };
        const auto est = mc_estimate(sim, x0, c.T, fs, c.n_paths, c.seed, c.threads);

        stage = "compare";
        const std::vector<std::pair<std::string, double>> analytic = {
            {"laplace", lap}, {"mean_v", mean_v}, {"mean_w", mean_w}, {"second_moment_vw", m2_vw}, {"second_moment_vv", m2_vv}};
        bool all = true;
        io::json checks = io::json::array();
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double z = z_score(analytic[i].second, est[i].estimate, est[i].standard_error);
            const bool pass = std::abs(z) <= 3.0;
            all = all && pass;
            checks.push_back({{"name", analytic[i].first},
                              {"analytic", analytic[i].second},
                              {"mc", est[i].estimate},
                              {"se", est[i].standard_error},
                              {"z", io::num(z)},
                              {"pass", pass}});
            log << (pass ? "pass " : "FAIL ") << analytic[i].first << "  analytic " << io::fmt(analytic[i].second)
                << "  mc " << io::fmt(est[i].estimate) << "  z " << io::fmt(z) << "\n";
        }
        report["k"] = k;
        report["T"] = c.T;
        report["n_paths"] = c.n_paths;
        report["seed"] = c.seed;
        report["fault_inject"] = c.fault_inject;
        report["checks"] = checks;
        report["all_pass"] = all;
        io::write_file(out_path(c, "verify.json"), dump(report));
        return all ? kOk : kFailure;
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericalError("stage " + stage + ": " + e.what());
    }
}

/// Runs a subcommand, mapping exceptions to exit codes.
inline int run(const RunConfig& c, std::ostream& log, std::ostream& err) {
    try {
        if (c.subcommand == "validate") return cmd_validate(c, log);
        if (c.subcommand == "solve") return cmd_solve(c, log);
        if (c.subcommand == "moments") return cmd_moments(c, log);
        if (c.subcommand == "simulate") return cmd_simulate(c, log);
        if (c.subcommand == "verify") return cmd_verify(c, log);
        err << "unknown subcommand '" << c.subcommand << "'\n";
        return kInputError;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const io::json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace affinehs::cli
