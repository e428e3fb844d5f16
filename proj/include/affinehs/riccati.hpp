#pragma once

// The vector fields F, R of the generalized Riccati system, their
// finite-activity truncations, a cone-aware Dormand–Prince integrator for
// (φ, ψ), and the k → ∞ truncation cascade.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "affinehs/errors.hpp"
#include "affinehs/params.hpp"
#include "affinehs/quadrature.hpp"
#include "affinehs/symcone.hpp"

namespace affinehs {

/// e^{-a} − 1 + a without cancellation for small |a|.
inline double exp_remainder(double a) {
    if (std::abs(a) < 1e-2) {
        const double a2 = a * a;
        return a2 * (0.5 - a * (1.0 / 6 - a * (1.0 / 24 - a * (1.0 / 120 - a * (1.0 / 720 - a / 5040)))));
    }
    return std::expm1(-a) + a;
}

/// e^{-⟨ξ,u⟩} − 1 + ⟨χ(ξ),u⟩ given s = ⟨ξ,u⟩ and whether ‖ξ‖ ≤ 1.
inline double jump_integrand(double s, bool small) { return small ? exp_remainder(s) : std::expm1(-s); }

/**
 * F(u) = ⟨b,u⟩ − ∫(e^{-⟨ξ,u⟩} − 1 + ⟨χ(ξ),u⟩) m(dξ)
 * R(u) = B*(u) − ∫(e^{-⟨ξ,u⟩} − 1 + ⟨χ(ξ),u⟩) μ(dξ)/‖ξ‖²
 * for the measures held by the parameter set (truncate first for F^(k), R^(k)).
 */
class RiccatiField {
public:
    explicit RiccatiField(ParameterSet p, quad::Tolerance tol = {1e-12, 1e-10, 2000})
        : p_(std::move(p)), tol_(tol) {}

    const ParameterSet& parameters() const { return p_; }

    double F(const SymMatrix& u) const {
        double val = inner(p_.b, u);
        for (const auto& a : p_.m.atoms) val -= a.weight * jump_integrand(inner(a.xi, u), a.xi.norm() <= 1.0);
        for (std::size_t j = 0; j < p_.m.rays.size(); ++j) {
            const auto& ray = p_.m.rays[j];
            const double s = inner(ray.direction, u);
            if (s == 0.0) continue;
            val -= ray_integral(ray.density, s, static_cast<int>(j), "m");
        }
        return val;
    }

    SymMatrix R(const SymMatrix& u) const {
        SymMatrix val = p_.B.apply_adjoint(u);
        for (const auto& a : p_.mu.atoms) {
            const double n = a.xi.norm();
            const double k = jump_integrand(inner(a.xi, u), n <= 1.0);
            if (k != 0.0) val -= (k / (n * n)) * a.mass;
        }
        for (std::size_t j = 0; j < p_.mu.rays.size(); ++j) {
            const auto& ray = p_.mu.rays[j];
            const double s = inner(ray.direction, u);
            if (s == 0.0) continue;
            val -= ray_integral(ray.kernel, s, static_cast<int>(j), "mu") * ray.weight;
        }
        return val;
    }

private:
    // ∫ (e^{-rs} − 1 + rs·1{r≤1}) h(r) dr
    double ray_integral(const RadialDensity& h, double s, int index, const char* which) const {
        try {
            return radial_integral(h, 0.0, [s](double r) { return jump_integrand(r * s, r <= 1.0); }, {}, tol_);
        } catch (const QuadratureError& e) {
            throw QuadratureError(std::string(which) + " ray " + std::to_string(index) + ": " + e.what(), index);
        }
    }

    ParameterSet p_;
    quad::Tolerance tol_;
};

namespace detail {
inline void require_cone(const SymMatrix& u, const char* what) {
    if (!is_psd(u, default_cone_tol(u))) throw InputError(std::string(what) + ": argument must lie in the PSD cone");
}
} // namespace detail

inline double eval_F(const ParameterSet& p, const SymMatrix& u) {
    detail::require_cone(u, "eval_F");
    return RiccatiField(p).F(u);
}

inline SymMatrix eval_R(const ParameterSet& p, const SymMatrix& u) {
    detail::require_cone(u, "eval_R");
    return RiccatiField(p).R(u);
}

inline double eval_Fk(const ParameterSet& p, int k, const SymMatrix& u) { return eval_F(truncate(p, k), u); }
inline SymMatrix eval_Rk(const ParameterSet& p, int k, const SymMatrix& u) { return eval_R(truncate(p, k), u); }

/// ‖μ(H⁺∖{0})‖, the Frobenius norm of the total μ-mass.
inline double mu_total_norm(const ParameterSet& p) { return total_mass(p.mu, p.dim).norm(); }

/// (‖b‖ + ∫‖ξ‖²m)(1 + ‖u‖²) bounds |F(u)|.
inline double quadratic_bound_F(const ParameterSet& p, const SymMatrix& u) {
    return (p.b.norm() + second_moment(p.m)) * (1.0 + u.norm() * u.norm());
}

/// (‖B*‖ + ‖μ_total‖)(1 + ‖u‖²) bounds ‖R(u)‖.
inline double quadratic_bound_R(const ParameterSet& p, const SymMatrix& u) {
    return (p.B.norm() + mu_total_norm(p)) * (1.0 + u.norm() * u.norm());
}

/// ‖B‖ + 2k‖μ_total‖: Lipschitz constant of R^(k) on the cone.
inline double lipschitz_constant(const ParameterSet& p, int k) { return p.B.norm() + 2.0 * k * mu_total_norm(p); }

/// ‖B‖ + 2‖μ_total‖: exponential rate bounding ‖ψ(t,u)‖/‖u‖.
inline double growth_rate(const ParameterSet& p) { return lipschitz_constant(p, 1); }

/// ‖μ({‖ξ‖ ≤ 1/k})‖·‖u‖² bounds ‖R^(k)(u) − R(u)‖.
inline double truncation_bound(const ParameterSet& p, int k, const SymMatrix& u) {
    return total_mass(p.mu, p.dim, NormBand::norm_leq(1.0 / k)).norm() * u.norm() * u.norm();
}

// ---------------------------------------------------------------------------
// Integrator
// ---------------------------------------------------------------------------

enum class ConePolicy { reject_step, clip_and_log };

struct RiccatiOptions {
    double initial_dt = 1e-2;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_steps = 1000000;
    double cone_tol = 1e-9;
    ConePolicy policy = ConePolicy::reject_step;
    /// Uniform checkpoints the integrator lands on exactly (excluding t = 0).
    int output_points = 20;
    bool check_growth = true;
    /// Truncation levels for the cascade; strictly increasing.
    std::vector<int> k_schedule = {1, 2, 4, 8, 16, 32, 64};
    double monotone_tol = 1e-8;
    /// Cascade also integrates the untruncated system and checks ψ ≤ ψ^(k).
    bool solve_limit = true;
    quad::Tolerance quadrature{1e-12, 1e-10, 2000};

    void validate() const {
        if (!(initial_dt > 0 && abs_tol > 0 && rel_tol > 0 && cone_tol > 0 && monotone_tol > 0))
            throw InputError("RiccatiOptions: tolerances and initial step must be positive");
        if (output_points < 1) throw InputError("RiccatiOptions: output_points must be >= 1");
        for (std::size_t i = 1; i < k_schedule.size(); ++i)
            if (k_schedule[i] <= k_schedule[i - 1]) throw InputError("RiccatiOptions: k schedule must be strictly increasing");
        for (int k : k_schedule)
            if (k < 1) throw InputError("RiccatiOptions: k schedule entries must be >= 1");
    }
};

struct RiccatiPoint {
    double t = 0.0;
    double phi = 0.0;
    SymMatrix psi;
    double dphi = 0.0;  // F(ψ(t))
    SymMatrix dpsi;     // R(ψ(t))
    double min_eig = 0.0;
    double step = 0.0;  // size of the step that produced this point
};

struct RiccatiDiagnostics {
    int accepted_steps = 0;
    int rejected_steps = 0;       // error-control rejections
    int cone_rejections = 0;      // steps halved because ψ left the cone
    double max_cone_violation = 0.0;  // largest −min_eig over accepted points (0 if none)
    double clip_total = 0.0;      // Σ Frobenius size of clipped parts (clip policy)
    int clip_events = 0;
};

struct RiccatiSolution {
    std::vector<RiccatiPoint> points;
    RiccatiDiagnostics diagnostics;
    std::optional<int> k;  // truncation level, empty for the untruncated system
    std::optional<double> cascade_residual;

    double T() const { return points.back().t; }
    const RiccatiPoint& final() const { return points.back(); }

    /// (φ, ψ) at time t: exact on grid points, cubic Hermite in between.
    std::pair<double, SymMatrix> at(double t) const {
        if (t <= points.front().t) return {points.front().phi, points.front().psi};
        if (t >= points.back().t) return {points.back().phi, points.back().psi};
        auto it = std::lower_bound(points.begin(), points.end(), t,
                                   [](const RiccatiPoint& p, double x) { return p.t < x; });
        if (it->t == t) return {it->phi, it->psi};
        const RiccatiPoint& p1 = *it;
        const RiccatiPoint& p0 = *(it - 1);
        const double h = p1.t - p0.t;
        const double s = (t - p0.t) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        const double phi = h00 * p0.phi + h10 * h * p0.dphi + h01 * p1.phi + h11 * h * p1.dphi;
        SymMatrix psi = h00 * p0.psi + (h10 * h) * p0.dpsi + h01 * p1.psi + (h11 * h) * p1.dpsi;
        return {phi, psi};
    }
};

/**
 * Integrates ∂φ/∂t = F(ψ), ∂ψ/∂t = R(ψ), φ(0) = 0, ψ(0) = u on [0, T] with
 * embedded Dormand–Prince 5(4). φ rides along in the state so both share
 * error control. Every accepted point satisfies min_eig(ψ) ≥ −cone_tol·(1+‖u‖),
 * enforced by halving (reject_step) or by eigenvalue clipping (clip_and_log).
 * With `k` the truncated fields F^(k), R^(k) are used.
 */
inline RiccatiSolution solve_riccati(const ParameterSet& p, const SymMatrix& u, double T,
                                     const RiccatiOptions& opts = {}, std::optional<int> k = std::nullopt) {
    opts.validate();
    if (!(T >= 0) || !std::isfinite(T)) throw InputError("solve_riccati: T must be finite and nonnegative");
    if (u.dim() != p.dim) throw InputError("solve_riccati: u has the wrong dimension");
    detail::require_cone(u, "solve_riccati");

    const ParameterSet params = k ? truncate(p, *k) : p;
    const RiccatiField field(params, opts.quadrature);
    const VecBasis basis(p.dim);
    const int n = basis.size();
    const double cone_tol = opts.cone_tol * (1.0 + u.norm());
    const double rate = growth_rate(params);
    const double unorm = u.norm();

    auto rhs = [&](const Vector& y) {
        Vector dy(n + 1);
        const SymMatrix psi = basis.unvec(y.tail(n));
        dy(0) = field.F(psi);
        dy.tail(n) = basis.vec(field.R(psi));
        return dy;
    };
    auto make_point = [&](double t, const Vector& y, const Vector& dy, double step) {
        RiccatiPoint pt;
        pt.t = t;
        pt.phi = y(0);
        pt.psi = basis.unvec(y.tail(n));
        pt.dphi = dy(0);
        pt.dpsi = basis.unvec(dy.tail(n));
        pt.min_eig = min_eigenvalue(pt.psi);
        pt.step = step;
        return pt;
    };

    RiccatiSolution sol;
    sol.k = k;
    Vector y(n + 1);
    y(0) = 0.0;
    y.tail(n) = basis.vec(u);
    Vector f0 = rhs(y);
    sol.points.push_back(make_point(0.0, y, f0, 0.0));
    if (T == 0.0) return sol;

    // Dormand–Prince 5(4)
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;

    const int n_out = opts.output_points;
    int next_out = 1;
    auto checkpoint = [&](int j) { return j == n_out ? T : T * j / n_out; };

    double t = 0.0;
    double dt = std::min(opts.initial_dt, T);
    const double min_dt = 1e-14 * T;
    int steps = 0;
    while (t < T) {
        if (++steps > opts.max_steps) throw NumericalError("solve_riccati: exceeded max_steps");
        const double target = checkpoint(next_out);
        double h = dt;
        bool lands = false;
        if (t + h >= target - 1e-12 * T) {
            h = target - t;
            lands = true;
        }
        if (h < min_dt && !lands)
            throw NumericalError("solve_riccati: step size underflow at t=" + std::to_string(t) +
                                 " (stiffness/cone breach)");

        const Vector k1 = f0;
        const Vector k2 = rhs(y + h * (a21 * k1));
        const Vector k3 = rhs(y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Vector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Vector k7 = rhs(y_new);
        const Vector err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double scale = opts.abs_tol + opts.rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            err = std::max(err, std::abs(err_vec(i)) / scale);
        }
        if (!std::isfinite(err)) err = 1e10;
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);

        if (err > 1.0) {
            ++sol.diagnostics.rejected_steps;
            dt = h * std::max(factor, 0.2);
            if (dt < min_dt)
                throw NumericalError("solve_riccati: step size underflow at t=" + std::to_string(t) +
                                     " (stiffness/cone breach)");
            continue;
        }

        SymMatrix psi_new = basis.unvec(y_new.tail(n));
        double lmin = min_eigenvalue(psi_new);
        if (lmin < -cone_tol) {
            if (opts.policy == ConePolicy::reject_step) {
                ++sol.diagnostics.cone_rejections;
                dt = 0.5 * h;
                if (dt < min_dt)
                    throw NumericalError("solve_riccati: step size underflow at t=" + std::to_string(t) +
                                         " (stiffness/cone breach, min eigenvalue " + std::to_string(lmin) + ")");
                continue;
            }
            auto [clipped, removed] = clip_to_cone(psi_new);
            sol.diagnostics.clip_total += removed;
            ++sol.diagnostics.clip_events;
            psi_new = clipped;
            y_new.tail(n) = basis.vec(psi_new);
            k7 = rhs(y_new);
            lmin = min_eigenvalue(psi_new);
        }

        const double t_new = lands ? target : t + h;
        if (opts.check_growth) {
            const double bound = std::exp(rate * t_new) * unorm * (1.0 + 1e-6);
            if (psi_new.norm() > bound)
                throw NumericalError("solve_riccati: growth bound breached at t=" + std::to_string(t_new) + " (|psi|=" +
                                     std::to_string(psi_new.norm()) + " > " + std::to_string(bound) + ")");
        }

        t = t_new;
        y = y_new;
        f0 = k7;
        sol.diagnostics.max_cone_violation = std::max(sol.diagnostics.max_cone_violation, -lmin);
        ++sol.diagnostics.accepted_steps;
        sol.points.push_back(make_point(t, y, f0, h));
        if (lands) ++next_out;
        // a step shortened to hit a checkpoint does not shrink the controller's proposal
        dt = lands ? std::max(dt, h * factor) : h * factor;
    }
    return sol;
}

struct CascadeLevel {
    int k = 0;
    double residual = std::numeric_limits<double>::quiet_NaN();  // sup ‖ψ^(k) − ψ^(previous k)‖
    double min_monotone_eig = std::numeric_limits<double>::quiet_NaN();  // min λ(ψ^(prev) − ψ^(k))
    int accepted_steps = 0;
};

struct CascadeDiagnostics {
    std::vector<CascadeLevel> levels;
    double residual = std::numeric_limits<double>::quiet_NaN();
    /// min over checkpoints of λ_min(ψ^(k_max) − ψ), when the limit system was solved.
    std::optional<double> min_limit_gap;
    std::vector<double> checkpoints;
};

struct CascadeResult {
    RiccatiSolution solution;  // largest k
    CascadeDiagnostics diagnostics;
    std::optional<RiccatiSolution> limit;
};

/**
 * Solves the truncated systems for every k of the schedule, checks that
 * ψ^(k) decreases in the cone order as k grows (and dominates the solution
 * of the untruncated system), and reports the sup-distance between
 * successive levels at the shared checkpoints.
 */
inline CascadeResult solve_cascade(const ParameterSet& p, const SymMatrix& u, double T, const RiccatiOptions& opts = {}) {
    opts.validate();
    if (opts.k_schedule.empty()) throw InputError("solve_cascade: empty k schedule");
    CascadeResult out;
    std::vector<double> grid;
    for (int j = 0; j <= opts.output_points; ++j) grid.push_back(j == opts.output_points ? T : T * j / opts.output_points);
    out.diagnostics.checkpoints = grid;

    std::optional<RiccatiSolution> prev;
    for (int k : opts.k_schedule) {
        RiccatiSolution s = solve_riccati(p, u, T, opts, k);
        CascadeLevel level;
        level.k = k;
        level.accepted_steps = s.diagnostics.accepted_steps;
        if (prev) {
            double res = 0.0;
            double mono = std::numeric_limits<double>::infinity();
            for (std::size_t j = 1; j < grid.size(); ++j) {  // all levels agree at t = 0
                const double t = grid[j];
                const SymMatrix a = prev->at(t).second;
                const SymMatrix b = s.at(t).second;
                res = std::max(res, (a - b).norm());
                mono = std::min(mono, min_eigenvalue(a - b));
            }
            level.residual = res;
            level.min_monotone_eig = mono;
            if (mono < -opts.monotone_tol)
                throw NumericalError("solve_cascade: cone-order monotonicity violated between k=" +
                                     std::to_string(prev->k.value_or(0)) + " and k=" + std::to_string(k) +
                                     " (min eigenvalue " + std::to_string(mono) + ")");
        }
        out.diagnostics.levels.push_back(level);
        prev = std::move(s);
    }
    out.solution = std::move(*prev);
    out.diagnostics.residual = out.diagnostics.levels.size() > 1 ? out.diagnostics.levels.back().residual : 0.0;
    out.solution.cascade_residual = out.diagnostics.residual;

    if (opts.solve_limit) {
        RiccatiSolution lim = solve_riccati(p, u, T, opts);
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j < grid.size(); ++j)
            gap = std::min(gap, min_eigenvalue(out.solution.at(grid[j]).second - lim.at(grid[j]).second));
        out.diagnostics.min_limit_gap = gap;
        if (gap < -opts.monotone_tol)
            throw NumericalError("solve_cascade: limit solution not dominated by the truncated solution (min eigenvalue " +
                                 std::to_string(gap) + ")");
        out.limit = std::move(lim);
    }
    return out;
}

} // namespace affinehs
