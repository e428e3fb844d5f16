#pragma once

// Derivatives of F and R at u = 0, the variational solutions D₊ψ(t,0),
// D₊²ψ(t,0), closed-form first and second moments of ⟨X_t, v⟩, the
// exponential-affine Laplace transform and two generator evaluations.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "affinehs/errors.hpp"
#include "affinehs/params.hpp"
#include "affinehs/quadrature.hpp"
#include "affinehs/riccati.hpp"
#include "affinehs/symcone.hpp"

namespace affinehs {

/// One term −⟨a,v⟩⟨a,w⟩·out of a second derivative.
template <class Out>
struct QuadraticTerm {
    SymMatrix a;
    Out out;
};

struct DerivativeBundle {
    int dim = 0;
    SuperOperator dR0;  // v ↦ B*(v) + ∫_{‖ξ‖>1} ⟨ξ,v⟩ μ(dξ)/‖ξ‖²
    SymMatrix dF0;      // Riesz representative: dF0(v) = ⟨dF0, v⟩
    std::vector<QuadraticTerm<SymMatrix>> d2R_terms;
    std::vector<QuadraticTerm<double>> d2F_terms;

    double dF(const SymMatrix& v) const { return inner(dF0, v); }

    /// −∫⟨ξ,v⟩⟨ξ,w⟩ μ(dξ)/‖ξ‖²
    SymMatrix d2R(const SymMatrix& v, const SymMatrix& w) const {
        SymMatrix acc(dim);
        for (const auto& t : d2R_terms) acc -= (inner(t.a, v) * inner(t.a, w)) * t.out;
        return acc;
    }

    /// −∫⟨ξ,v⟩⟨ξ,w⟩ m(dξ)
    double d2F(const SymMatrix& v, const SymMatrix& w) const {
        double acc = 0.0;
        for (const auto& t : d2F_terms) acc -= inner(t.a, v) * inner(t.a, w) * t.out;
        return acc;
    }
};

inline DerivativeBundle derivative_bundle(const ParameterSet& p) {
    check_structure(p);
    const int d = p.dim;
    DerivativeBundle db;
    db.dim = d;
    db.dR0 = p.B.adjoint();
    for (const auto& a : p.mu.atoms) {
        const double n = a.xi.norm();
        const SymMatrix scaled = (1.0 / (n * n)) * a.mass;
        if (n > 1.0) db.dR0 += SuperOperator::rank_one(a.xi, scaled);
        db.d2R_terms.push_back({a.xi, scaled});
    }
    for (const auto& r : p.mu.rays) {
        const double c1 = r.kernel.moment(1.0, 1.0, kInf);
        if (c1 != 0.0) db.dR0 += SuperOperator::rank_one(r.direction, c1 * r.weight);
        const double c2 = r.kernel.moment(2.0);
        if (!std::isfinite(c1) || !std::isfinite(c2)) throw InputError("derivative_bundle: mu ray has infinite moments");
        db.d2R_terms.push_back({r.direction, c2 * r.weight});
    }
    db.dF0 = p.b + first_moment(p.m, d, NormBand::norm_gt(1.0));
    for (const auto& a : p.m.atoms) db.d2F_terms.push_back({a.xi, a.weight});
    for (const auto& r : p.m.rays) db.d2F_terms.push_back({r.direction, r.density.moment(2.0)});
    if (!db.dF0.all_finite()) throw InputError("derivative_bundle: m has infinite first moment beyond norm 1");
    return db;
}

struct MomentOptions {
    double abs_tol = 1e-9;  // panel-doubling stability threshold
    int max_panels = 4096;
};

/**
 * Moment formulas of one parameter set. Keeps the derivative bundle and the
 * semigroup e^{t·dR0} so repeated evaluations share the setup.
 */
class MomentEngine {
public:
    explicit MomentEngine(const ParameterSet& p, MomentOptions opts = {})
        : bundle_(derivative_bundle(p)), prop_(bundle_.dR0), opts_(opts) {}

    const DerivativeBundle& bundle() const { return bundle_; }

    /// D₊ψ(t,0)(v) = e^{t·dR0} v
    SymMatrix dpsi0(double t, const SymMatrix& v) const {
        if (!(t >= 0)) throw InputError("dpsi0: t must be nonnegative");
        return prop_.apply(t, v);
    }

    /// D₊²ψ(t,0)(v,w) = ∫₀ᵗ e^{(t−s)dR0} d2R0(e^{s·dR0}v, e^{s·dR0}w) ds
    SymMatrix d2psi0(double t, const SymMatrix& v, const SymMatrix& w) const {
        if (!(t >= 0)) throw InputError("d2psi0: t must be nonnegative");
        const SymMatrix zero(bundle_.dim);
        if (t == 0.0 || bundle_.d2R_terms.empty()) return zero;
        auto integrand = [&](double s) {
            const SymMatrix q = bundle_.d2R(prop_.apply(s, v), prop_.apply(s, w));
            return prop_.apply(t - s, q);
        };
        return quad::composite_doubling(integrand, 0.0, t, zero, matrix_distance, opts_.abs_tol, opts_.max_panels);
    }

    /// E[⟨X_t,v⟩ | X₀ = x] = ∫₀ᵗ dF0(e^{s·dR0}v) ds + ⟨x, e^{t·dR0}v⟩
    double mean(const SymMatrix& x, double t, const SymMatrix& v) const {
        return dphi0(t, v) + inner(x, dpsi0(t, v));
    }

    /// E[⟨X_t,v⟩⟨X_t,w⟩ | X₀ = x]
    double second_moment(const SymMatrix& x, double t, const SymMatrix& v, const SymMatrix& w) const {
        return covariance(x, t, v, w) + mean(x, t, v) * mean(x, t, w);
    }

    /// Cov(⟨X_t,v⟩, ⟨X_t,w⟩ | X₀ = x) = −D₊²φ(t,0)(v,w) − ⟨x, D₊²ψ(t,0)(v,w)⟩
    double covariance(const SymMatrix& x, double t, const SymMatrix& v, const SymMatrix& w) const {
        if (!(t >= 0)) throw InputError("second_moment: t must be nonnegative");
        if (t == 0.0) return 0.0;
        auto direct = [&](double s) { return -bundle_.d2F(prop_.apply(s, v), prop_.apply(s, w)); };
        const double a = quad::composite_doubling(direct, 0.0, t, 0.0, scalar_distance, opts_.abs_tol, opts_.max_panels);
        double nested = 0.0;
        if (!bundle_.d2R_terms.empty()) {
            // ∫₀ᵗ∫₀ˢ dF0(e^{(s−r)dR0} d2R0(·,·)) dr ds, inner integral being D₊²ψ(s,0)(v,w)
            auto outer = [&](double s) { return -bundle_.dF(d2psi0(s, v, w)); };
            nested = quad::composite_doubling(outer, 0.0, t, 0.0, scalar_distance, opts_.abs_tol, opts_.max_panels);
        }
        return a + nested - inner(x, d2psi0(t, v, w));
    }

    /// D₊φ(t,0)(v) = ∫₀ᵗ dF0(e^{s·dR0}v) ds
    double dphi0(double t, const SymMatrix& v) const {
        if (!(t >= 0)) throw InputError("mean: t must be nonnegative");
        auto f = [&](double s) { return bundle_.dF(prop_.apply(s, v)); };
        return quad::composite_doubling(f, 0.0, t, 0.0, scalar_distance, opts_.abs_tol, opts_.max_panels);
    }

    /// E[‖X_t‖² | X₀ = x] as the trace of the second-moment form over an orthonormal basis.
    double mean_square_norm(const SymMatrix& x, double t) const {
        const VecBasis basis(bundle_.dim);
        double s = 0.0;
        for (int k = 0; k < basis.size(); ++k) {
            const SymMatrix e = basis.element(k);
            s += second_moment(x, t, e, e);
        }
        return s;
    }

private:
    static double matrix_distance(const SymMatrix& a, const SymMatrix& b) { return (a - b).norm(); }
    static double scalar_distance(double a, double b) { return std::abs(a - b); }

    DerivativeBundle bundle_;
    Propagator prop_;
    MomentOptions opts_;
};

inline SymMatrix dpsi0(const ParameterSet& p, double t, const SymMatrix& v) { return MomentEngine(p).dpsi0(t, v); }

inline SymMatrix d2psi0(const ParameterSet& p, double t, const SymMatrix& v, const SymMatrix& w) {
    return MomentEngine(p).d2psi0(t, v, w);
}

inline double mean(const ParameterSet& p, const SymMatrix& x, double t, const SymMatrix& v) {
    return MomentEngine(p).mean(x, t, v);
}

inline double second_moment(const ParameterSet& p, const SymMatrix& x, double t, const SymMatrix& v,
                            const SymMatrix& w) {
    return MomentEngine(p).second_moment(x, t, v, w);
}

struct LaplaceOptions {
    RiccatiOptions riccati;
    /// Run the truncation cascade (diagnostics) before using the untruncated solution.
    bool cascade = false;
};

/// E[e^{−⟨X_t,u⟩} | X₀ = x] = exp(−φ(t,u) − ⟨x, ψ(t,u)⟩)
inline double laplace(const ParameterSet& p, const SymMatrix& x, double t, const SymMatrix& u,
                      const LaplaceOptions& opts = {}) {
    if (opts.cascade && !finite_activity(p)) {
        RiccatiOptions ro = opts.riccati;
        ro.solve_limit = true;
        const auto res = solve_cascade(p, u, t, ro);
        const auto& fin = res.limit->final();
        return std::exp(-fin.phi - inner(x, fin.psi));
    }
    const auto sol = solve_riccati(p, u, t, opts.riccati);
    return std::exp(-sol.final().phi - inner(x, sol.final().psi));
}

/// (−F(u) − ⟨x, R(u)⟩)·e^{−⟨x,u⟩}
inline double generator_exp(const ParameterSet& p, const SymMatrix& u, const SymMatrix& x) {
    const RiccatiField field(p);
    return (-field.F(u) - inner(x, field.R(u))) * std::exp(-inner(x, u));
}

/// ⟨b + B(x), v⟩ + ∫_{‖ξ‖>1} ⟨ξ,v⟩ ν(x,dξ), ν(x,dξ) = m(dξ) + ⟨μ(dξ),x⟩/‖ξ‖², by quadrature.
inline double generator_linear(const ParameterSet& p, const SymMatrix& v, const SymMatrix& x) {
    const auto large = NormBand::norm_gt(1.0);
    auto pair_v = [&](const SymMatrix& xi) { return inner(xi, v); };
    const double from_m = integrate_scalar(p.m, pair_v, large);
    const SymMatrix from_mu = integrate_kernel(p.mu, p.dim, pair_v, large);
    return inner(p.b + p.B.apply(x), v) + from_m + inner(from_mu, x);
}

struct GrowthFit {
    double M = 0.0;
    double omega = 0.0;
};

/**
 * Empirical constants with E[‖X_t‖² | X₀ = x] ≤ M e^{ωt}(‖x‖² + 1) on the
 * sampled (x, t): least-squares slope of the log ratio in t, then M raised
 * until the bound holds at every sample. A diagnostic, not a proof.
 */
inline GrowthFit fit_moment_growth(const ParameterSet& p, const std::vector<SymMatrix>& xs,
                                   const std::vector<double>& ts) {
    if (xs.empty() || ts.empty()) throw InputError("fit_moment_growth: need at least one x and one t");
    const MomentEngine eng(p);
    std::vector<std::pair<double, double>> samples;  // (t, log ratio)
    for (const auto& x : xs)
        for (double t : ts) {
            const double r = eng.mean_square_norm(x, t) / (x.norm() * x.norm() + 1.0);
            samples.push_back({t, std::log(std::max(r, 1e-300))});
        }
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (auto [t, y] : samples) {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double n = static_cast<double>(samples.size());
    const double den = n * stt - st * st;
    GrowthFit fit;
    fit.omega = den > 0 ? (n * sty - st * sy) / den : 0.0;
    double logM = -kInf;
    for (auto [t, y] : samples) logM = std::max(logM, y - fit.omega * t);
    fit.M = std::exp(logM);
    return fit;
}

} // namespace affinehs
