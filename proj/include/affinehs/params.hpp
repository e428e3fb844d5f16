#pragma once

// Jump measures built from atoms and radial rays, the parameter tuple
// (b, B, m, μ), integration against the measures, admissibility checks, the
// admissible-by-construction builder, and truncation of small jumps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "affinehs/errors.hpp"
#include "affinehs/quadrature.hpp"
#include "affinehs/rng.hpp"
#include "affinehs/symcone.hpp"

namespace affinehs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/**
 * Density on the radius r > 0 of a ray:
 *   power:        c·r^(-1-α) on [rmin, rmax]
 *   exponential:  c·e^(-λr)  on [rmin, rmax]   (rmax usually +inf)
 */
class RadialDensity {
public:
    enum class Family { power, exponential };

    static RadialDensity power(double c, double alpha, double rmin = 0.0, double rmax = 1.0) {
        return RadialDensity(Family::power, c, alpha, rmin, rmax);
    }
    static RadialDensity exponential(double c, double lambda, double rmin = 0.0, double rmax = kInf) {
        if (!(lambda > 0)) throw InputError("exponential density: lambda must be positive");
        return RadialDensity(Family::exponential, c, lambda, rmin, rmax);
    }

    Family family() const { return family_; }
    double scale() const { return c_; }
    /// α for the power family, λ for the exponential family.
    double shape() const { return shape_; }
    double rmin() const { return rmin_; }
    double rmax() const { return rmax_; }

    double operator()(double r) const {
        if (r < rmin_ || r > rmax_ || r <= 0) return 0.0;
        return family_ == Family::power ? c_ * std::pow(r, -1.0 - shape_) : c_ * std::exp(-shape_ * r);
    }

    /// ∫ r^p h(r) dr over [lo, hi] ∩ [rmin, rmax], +inf when divergent.
    double moment(double p, double lo = 0.0, double hi = kInf) const {
        const double a = std::max(lo, rmin_);
        const double b = std::min(hi, rmax_);
        if (!(a < b)) return 0.0;
        if (family_ == Family::power) {
            const double e = p - shape_;
            if (e == 0.0) {
                if (a == 0.0 || std::isinf(b)) return kInf;
                return c_ * (std::log(b) - std::log(a));
            }
            if (a == 0.0 && e < 0) return kInf;
            if (std::isinf(b) && e > 0) return kInf;
            const double upper = std::isinf(b) ? 0.0 : std::pow(b, e);
            const double lower = a == 0.0 ? 0.0 : std::pow(a, e);
            return c_ * (upper - lower) / e;
        }
        const int k = static_cast<int>(p);
        if (k != p || k < 0 || k > 8)
            throw InputError("exponential density: moment order must be an integer in [0, 8]");
        return c_ * (upper_tail(k, a) - (std::isinf(b) ? 0.0 : upper_tail(k, b)));
    }

    /// Support restricted to r > lo.
    RadialDensity restricted(double lo) const {
        RadialDensity out = *this;
        out.rmin_ = std::max(rmin_, lo);
        return out;
    }

    bool empty() const { return !(rmin_ < rmax_); }

    /// Cumulative mass on [rmin, r] relative to the total (finite-activity only).
    double cdf(double r) const { return moment(0.0, 0.0, r) / moment(0.0); }

    bool operator==(const RadialDensity&) const = default;

private:
    RadialDensity(Family f, double c, double shape, double rmin, double rmax)
        : family_(f), c_(c), shape_(shape), rmin_(rmin), rmax_(rmax) {
        if (!(c > 0) || !std::isfinite(c)) throw InputError("radial density: scale c must be positive");
        if (!(rmin >= 0) || !(rmax > rmin)) throw InputError("radial density: need 0 <= rmin < rmax");
        if (!std::isfinite(shape)) throw InputError("radial density: shape must be finite");
    }

    // ∫_a^∞ r^k e^{-λr} dr = e^{-λa} Σ_j k!/j! a^j / λ^{k-j+1}
    double upper_tail(int k, double a) const {
        double sum = 0.0;
        double fact_ratio = 1.0;  // k!/j!
        for (int j = k; j >= 0; --j) {
            sum += fact_ratio * std::pow(a, j) / std::pow(shape_, k - j + 1);
            fact_ratio *= j;
        }
        return std::exp(-shape_ * a) * sum;
    }

    Family family_;
    double c_;
    double shape_;
    double rmin_;
    double rmax_;
};

/// Set of jump sizes selected by norm: lo < ‖ξ‖ ≤ hi.
struct NormBand {
    double lo = 0.0;
    double hi = kInf;

    static NormBand all() { return {}; }
    static NormBand norm_gt(double c) { return {c, kInf}; }
    static NormBand norm_leq(double c) { return {0.0, c}; }
    bool contains(double norm) const { return norm > lo && norm <= hi; }
};

struct ScalarAtom {
    SymMatrix xi;
    double weight;
};

struct ScalarRay {
    SymMatrix direction;  // PSD, unit norm
    RadialDensity density;  // density of m along the ray
};

/// m = Σ wᵢ δ_{ξᵢ} + Σ_j (law of r·D_j with density h_j).
struct ScalarJumpMeasure {
    std::vector<ScalarAtom> atoms;
    std::vector<ScalarRay> rays;
    bool empty() const { return atoms.empty() && rays.empty(); }
};

struct OperatorAtom {
    SymMatrix xi;
    SymMatrix mass;  // μ({ξ}), PSD
};

struct OperatorRay {
    SymMatrix direction;  // PSD, unit norm
    SymMatrix weight;     // PSD
    RadialDensity kernel;  // μ(dξ)/‖ξ‖² = weight · g(r) dr, so μ has density r²g(r)
};

struct OperatorJumpMeasure {
    std::vector<OperatorAtom> atoms;
    std::vector<OperatorRay> rays;
    bool empty() const { return atoms.empty() && rays.empty(); }
};

/// The tuple (b, B, m, μ) at matrix dimension d.
struct ParameterSet {
    int dim = 0;
    SymMatrix b;
    SuperOperator B;
    ScalarJumpMeasure m;
    OperatorJumpMeasure mu;
    /// Set when the measures have been restricted to ‖ξ‖ > 1/k.
    std::optional<int> truncation_level;
};

// ---------------------------------------------------------------------------
// Integration against the measures
// ---------------------------------------------------------------------------

namespace detail {

/// ∫ f(r) r^p h(r) dr over (lo, hi] ∩ supp h for one piece not straddling r = 1.
template <class F>
double radial_piece(const RadialDensity& h, double p, F& f, double a, double b,
                    const quad::Tolerance& tol) {
    if (!(a < b)) return 0.0;
    if (h.family() == RadialDensity::Family::power && a == 0.0) {
        const double e = p - 1.0 - h.shape();
        if (e < 0) {
            // r = s^q flattens the algebraic endpoint weight (q = 1/(1-α) for first-moment integrands).
            double q = 1.0;
            if (e + 1.0 > 0) q = 1.0 / (e + 1.0);
            else if (e + 2.0 > 0) q = 1.0 / (e + 2.0);
            else if (e + 3.0 > 0) q = 1.0 / (e + 3.0);
            q = std::min(q, 20.0);
            const double c = h.scale();
            auto g = [&](double s) {
                const double r = std::pow(s, q);
                return f(r) * c * q * std::pow(s, q * (e + 1.0) - 1.0);
            };
            const double smax = std::isinf(b) ? kInf : std::pow(b, 1.0 / q);
            return quad::integrate(g, 0.0, smax, tol).value;
        }
    }
    auto g = [&](double r) { return f(r) * std::pow(r, p) * h(r); };
    return quad::integrate(g, a, b, tol).value;
}

} // namespace detail

/**
 * ∫ f(r) r^p h(r) dr over r ∈ (band.lo, band.hi] ∩ supp h, with the range split
 * at r = 1 where the truncation function switches.
 */
template <class F>
double radial_integral(const RadialDensity& h, double p, F&& f, NormBand band = {},
                       const quad::Tolerance& tol = {}) {
    const double a = std::max(band.lo, h.rmin());
    const double b = std::min(band.hi, h.rmax());
    if (!(a < b)) return 0.0;
    if (a < 1.0 && b > 1.0)
        return detail::radial_piece(h, p, f, a, 1.0, tol) + detail::radial_piece(h, p, f, 1.0, b, tol);
    return detail::radial_piece(h, p, f, a, b, tol);
}

using MatrixFunctional = std::function<double(const SymMatrix&)>;

/// Σ_atoms w f(ξ) 1{ξ ∈ band} + Σ_rays ∫ f(rD) h(r) dr over the band.
inline double integrate_scalar(const ScalarJumpMeasure& m, const MatrixFunctional& f,
                               NormBand band = {}, const quad::Tolerance& tol = {}) {
    double total = 0.0;
    for (const auto& a : m.atoms)
        if (band.contains(a.xi.norm())) total += a.weight * f(a.xi);
    for (std::size_t j = 0; j < m.rays.size(); ++j) {
        const auto& ray = m.rays[j];
        try {
            total += radial_integral(ray.density, 0.0, [&](double r) { return f(r * ray.direction); }, band, tol);
        } catch (const QuadratureError& e) {
            throw QuadratureError(std::string("scalar ray ") + std::to_string(j) + ": " + e.what(),
                                  static_cast<int>(j));
        }
    }
    return total;
}

/// ∫ f(ξ) μ(dξ) over the band (μ-mass density r²g along rays).
inline SymMatrix integrate_operator(const OperatorJumpMeasure& mu, int dim, const MatrixFunctional& f,
                                    NormBand band = {}, const quad::Tolerance& tol = {}) {
    SymMatrix total(dim);
    for (const auto& a : mu.atoms)
        if (band.contains(a.xi.norm())) total += f(a.xi) * a.mass;
    for (std::size_t j = 0; j < mu.rays.size(); ++j) {
        const auto& ray = mu.rays[j];
        try {
            total += radial_integral(ray.kernel, 2.0, [&](double r) { return f(r * ray.direction); }, band, tol) *
                     ray.weight;
        } catch (const QuadratureError& e) {
            throw QuadratureError(std::string("operator ray ") + std::to_string(j) + ": " + e.what(),
                                  static_cast<int>(j));
        }
    }
    return total;
}

/// ∫ f(ξ) μ(dξ)/‖ξ‖² over the band.
inline SymMatrix integrate_kernel(const OperatorJumpMeasure& mu, int dim, const MatrixFunctional& f,
                                  NormBand band = {}, const quad::Tolerance& tol = {}) {
    SymMatrix total(dim);
    for (const auto& a : mu.atoms) {
        const double n = a.xi.norm();
        if (band.contains(n)) total += (f(a.xi) / (n * n)) * a.mass;
    }
    for (std::size_t j = 0; j < mu.rays.size(); ++j) {
        const auto& ray = mu.rays[j];
        try {
            total += radial_integral(ray.kernel, 0.0, [&](double r) { return f(r * ray.direction); }, band, tol) *
                     ray.weight;
        } catch (const QuadratureError& e) {
            throw QuadratureError(std::string("operator ray ") + std::to_string(j) + ": " + e.what(),
                                  static_cast<int>(j));
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Closed-form functionals of the measures
// ---------------------------------------------------------------------------

/// ∫‖ξ‖² m(dξ).
inline double second_moment(const ScalarJumpMeasure& m) {
    double s = 0.0;
    for (const auto& a : m.atoms) s += a.weight * a.xi.norm() * a.xi.norm();
    for (const auto& r : m.rays) s += r.density.moment(2.0);
    return s;
}

/// m(band), possibly +inf.
inline double activity(const ScalarJumpMeasure& m, NormBand band = {}) {
    double s = 0.0;
    for (const auto& a : m.atoms)
        if (band.contains(a.xi.norm())) s += a.weight;
    for (const auto& r : m.rays) s += r.density.moment(0.0, band.lo, band.hi);
    return s;
}

/// ∫_band ξ m(dξ) (+inf entries when divergent).
inline SymMatrix first_moment(const ScalarJumpMeasure& m, int dim, NormBand band) {
    SymMatrix s(dim);
    for (const auto& a : m.atoms)
        if (band.contains(a.xi.norm())) s += a.weight * a.xi;
    for (const auto& r : m.rays) {
        const double c = r.density.moment(1.0, band.lo, band.hi);
        if (c != 0.0) s += c * r.direction;
    }
    return s;
}

/// I_m = ∫ χ(ξ) m(dξ).
inline SymMatrix small_jump_mean(const ScalarJumpMeasure& m, int dim) {
    return first_moment(m, dim, NormBand::norm_leq(1.0));
}

/// μ(band) as a PSD matrix.
inline SymMatrix total_mass(const OperatorJumpMeasure& mu, int dim, NormBand band = {}) {
    SymMatrix s(dim);
    for (const auto& a : mu.atoms)
        if (band.contains(a.xi.norm())) s += a.mass;
    for (const auto& r : mu.rays) {
        const double c = r.kernel.moment(2.0, band.lo, band.hi);
        if (c != 0.0) s += c * r.weight;
    }
    return s;
}

/// ∫_band μ(dξ)/‖ξ‖², the state-dependent jump rate functional.
inline SymMatrix kernel_activity(const OperatorJumpMeasure& mu, int dim, NormBand band = {}) {
    SymMatrix s(dim);
    for (const auto& a : mu.atoms) {
        const double n = a.xi.norm();
        if (band.contains(n)) s += (1.0 / (n * n)) * a.mass;
    }
    for (const auto& r : mu.rays) {
        const double c = r.kernel.moment(0.0, band.lo, band.hi);
        if (c != 0.0) s += c * r.weight;
    }
    return s;
}

/// x ↦ ∫_band ξ ⟨μ(dξ), x⟩/‖ξ‖² as a sum of rank-one maps.
inline SuperOperator compensator(const OperatorJumpMeasure& mu, int dim, NormBand band = NormBand::norm_leq(1.0)) {
    SuperOperator op(dim);
    for (const auto& a : mu.atoms) {
        const double n = a.xi.norm();
        if (band.contains(n)) op += SuperOperator::rank_one(a.mass, (1.0 / (n * n)) * a.xi);
    }
    for (const auto& r : mu.rays) {
        const double c = r.kernel.moment(1.0, band.lo, band.hi);
        if (c != 0.0) op += SuperOperator::rank_one(r.weight, c * r.direction);
    }
    return op;
}

/// True when both measures have finite total activity.
inline bool finite_activity(const ParameterSet& p) {
    for (const auto& r : p.m.rays)
        if (!std::isfinite(r.density.moment(0.0))) return false;
    for (const auto& r : p.mu.rays)
        if (!std::isfinite(r.kernel.moment(0.0))) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Structural invariants
// ---------------------------------------------------------------------------

/// Throws InputError when a component violates its type invariants.
inline void check_structure(const ParameterSet& p) {
    const int d = p.dim;
    if (d <= 0) throw InputError("parameter set: dim must be positive");
    auto require_dim = [&](const SymMatrix& a, const std::string& what) {
        if (a.dim() != d) throw InputError(what + ": dimension " + std::to_string(a.dim()) + " != " + std::to_string(d));
    };
    auto require_psd = [&](const SymMatrix& a, const std::string& what) {
        if (!is_psd(a, default_cone_tol(a))) throw InputError(what + " must be positive semidefinite");
    };
    auto require_unit_direction = [&](const SymMatrix& a, const std::string& what) {
        require_dim(a, what);
        require_psd(a, what);
        if (std::abs(a.norm() - 1.0) > 1e-9) throw InputError(what + " must have unit Frobenius norm");
    };
    require_dim(p.b, "b");
    if (p.B.dim() != d) throw InputError("B: dimension mismatch");
    for (std::size_t i = 0; i < p.m.atoms.size(); ++i) {
        const auto& a = p.m.atoms[i];
        const std::string what = "m.atoms[" + std::to_string(i) + "]";
        require_dim(a.xi, what);
        require_psd(a.xi, what + ".xi");
        if (!(a.xi.norm() > 0)) throw InputError(what + ".xi must be nonzero");
        if (!(a.weight > 0) || !std::isfinite(a.weight)) throw InputError(what + ".w must be positive");
    }
    for (std::size_t i = 0; i < p.m.rays.size(); ++i)
        require_unit_direction(p.m.rays[i].direction, "m.rays[" + std::to_string(i) + "].D");
    for (std::size_t i = 0; i < p.mu.atoms.size(); ++i) {
        const auto& a = p.mu.atoms[i];
        const std::string what = "mu.atoms[" + std::to_string(i) + "]";
        require_dim(a.xi, what + ".xi");
        require_dim(a.mass, what + ".M");
        require_psd(a.xi, what + ".xi");
        if (!(a.xi.norm() > 0)) throw InputError(what + ".xi must be nonzero");
        require_psd(a.mass, what + ".M");
    }
    for (std::size_t i = 0; i < p.mu.rays.size(); ++i) {
        const auto& r = p.mu.rays[i];
        const std::string what = "mu.rays[" + std::to_string(i) + "]";
        require_unit_direction(r.direction, what + ".D");
        require_dim(r.weight, what + ".M");
        require_psd(r.weight, what + ".M");
    }
}

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------

struct ConditionResult {
    std::string id;           // "i_a", "i_b", "ii", "iii", "iv"
    std::string description;
    bool pass = true;
    double violation = 0.0;   // 0 when satisfied; size of the worst breach otherwise
    std::optional<SymMatrix> witness_u;  // direction v for (ii), u of the worst pair for (iv)
    std::optional<SymMatrix> witness_x;
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<ConditionResult> conditions;
    double tol = 0.0;
    int n_pairs = 0;
    std::uint64_t seed = 0;
    int pairs_checked = 0;

    bool all_pass() const {
        return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
    }
    const ConditionResult& at(const std::string& id) const {
        for (const auto& c : conditions)
            if (c.id == id) return c;
        throw InputError("no admissibility condition '" + id + "'");
    }
};

/// Haar-random orthogonal d×d matrix.
inline Matrix random_orthogonal(int d, CounterRng& rng) {
    Matrix g(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

/**
 * Pair of PSD matrices with ⟨u, x⟩ = 0, both with unit norm: a random
 * orthonormal frame is split into two disjoint groups and each side gets
 * positive random weights on its group. For d = 1 one side is necessarily 0.
 */
inline std::pair<SymMatrix, SymMatrix> random_orthogonal_pair(int d, CounterRng& rng) {
    if (d == 1) {
        if (rng.uniform() < 0.5) return {SymMatrix::identity(1), SymMatrix::zero(1)};
        return {SymMatrix::zero(1), SymMatrix::identity(1)};
    }
    const Matrix q = random_orthogonal(d, rng);
    const int split = 1 + static_cast<int>(rng.uniform() * (d - 1));
    SymMatrix u(d), x(d);
    for (int i = 0; i < d; ++i) {
        const double w = 0.05 + rng.uniform();
        SymMatrix proj = SymMatrix::outer(q.col(i));
        if (i < split) u += w * proj;
        else x += w * proj;
    }
    return {u / u.norm(), x / x.norm()};
}

/// Random PSD matrix of rank ≤ `rank` (rank = d when 0) with entries of order `scale`.
inline SymMatrix random_psd(int d, CounterRng& rng, double scale = 1.0, int rank = 0) {
    if (rank <= 0 || rank > d) rank = d;
    Matrix g(d, rank);
    for (int j = 0; j < rank; ++j)
        for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
    return SymMatrix::from_matrix(g * g.transpose() * (scale / rank));
}

/**
 * Checks the admissibility conditions. Moment conditions are decided from the
 * closed-form density moments; the drift condition by the smallest eigenvalue
 * of b − I_m (the cone is self-dual); the orthogonality condition on (B, μ)
 * by `n_pairs` random orthogonal PSD pairs. A condition passes when its value
 * is ≥ −tol·(1 + ‖operand‖).
 */
inline AdmissibilityReport validate_admissibility(const ParameterSet& p, double tol = 1e-9, int n_pairs = 200,
                                                  std::uint64_t seed = 0) {
    if (n_pairs < 1) throw InputError("validate_admissibility: n_pairs must be >= 1");
    check_structure(p);
    const int d = p.dim;
    AdmissibilityReport rep;
    rep.tol = tol;
    rep.n_pairs = n_pairs;
    rep.seed = seed;

    ConditionResult ia;
    ia.id = "i_a";
    ia.description = "second moment of m is finite";
    const double m2 = second_moment(p.m);
    ia.pass = std::isfinite(m2);
    ia.violation = ia.pass ? 0.0 : kInf;
    ia.detail = "int |xi|^2 m(dxi) = " + std::to_string(m2);
    rep.conditions.push_back(ia);

    ConditionResult ib;
    ib.id = "i_b";
    ib.description = "I_m = int chi(xi) m(dxi) exists";
    const SymMatrix im = small_jump_mean(p.m, d);
    ib.pass = im.all_finite();
    ib.violation = ib.pass ? 0.0 : kInf;
    rep.conditions.push_back(ib);

    ConditionResult ii;
    ii.id = "ii";
    ii.description = "b - I_m lies in the cone";
    if (!ib.pass) {
        ii.pass = false;
        ii.violation = kInf;
        ii.detail = "I_m is not finite";
    } else {
        const SymMatrix drift = p.b - im;
        const auto sd = spectral(drift);
        const double lmin = sd.values(0);
        ii.pass = lmin >= -tol * (1.0 + drift.norm());
        ii.violation = std::max(0.0, -lmin);
        ii.witness_u = SymMatrix::outer(sd.vectors.col(0));
        ii.detail = "min eigenvalue " + std::to_string(lmin);
    }
    rep.conditions.push_back(ii);

    ConditionResult iii;
    iii.id = "iii";
    iii.description = "small-jump first moment of mu(dxi)/|xi|^2 is finite";
    const SymMatrix mu_mass = total_mass(p.mu, d);
    bool ok = mu_mass.all_finite();
    for (const auto& r : p.mu.rays) ok = ok && std::isfinite(r.kernel.moment(1.0, 0.0, 1.0));
    const SuperOperator comp = compensator(p.mu, d);

    ConditionResult iv;
    iv.id = "iv";
    iv.description = "<B*(u),x> - int <chi(xi),u><mu(dxi),x>/|xi|^2 >= 0 on orthogonal pairs";
    CounterRng rng(mix64(seed), 0);
    double worst = kInf;
    int checked = 0;
    for (int i = 0; i < n_pairs; ++i) {
        auto [u, x] = random_orthogonal_pair(d, rng);
        const double compensated = ok ? inner(comp.apply(x), u) : kInf;
        if (!std::isfinite(compensated)) {
            ok = false;
            continue;
        }
        const SymMatrix bu = p.B.apply_adjoint(u);
        const double value = inner(bu, x) - compensated;
        const double threshold = -tol * (1.0 + bu.norm());
        ++checked;
        if (value - threshold < worst) {
            worst = value - threshold;
            iv.witness_u = u;
            iv.witness_x = x;
            iv.violation = std::max(0.0, -value);
            iv.detail = "worst value " + std::to_string(value);
        }
    }
    iii.pass = ok;
    iii.violation = ok ? 0.0 : kInf;
    rep.conditions.push_back(iii);
    iv.pass = ok && worst >= 0.0;
    if (!ok) iv.violation = kInf;
    rep.conditions.push_back(iv);
    rep.pairs_checked = checked;
    return rep;
}

/**
 * Parameter set admissible by construction:
 *   b = b_extra + I_m
 *   B(x) = βx + xβᵀ + Σ GⱼxGⱼᵀ + ∫ χ(ξ)⟨μ(dξ),x⟩/‖ξ‖²
 * On orthogonal PSD pairs the Lyapunov part vanishes, the conjugations are
 * nonnegative and the last term cancels the jump integral exactly.
 */
inline ParameterSet build_admissible(int d, const Matrix& beta, const std::vector<Matrix>& conjugations,
                                     const OperatorJumpMeasure& mu, const ScalarJumpMeasure& m,
                                     const SymMatrix& b_extra) {
    if (b_extra.dim() != d) throw InputError("build_admissible: b_extra dimension mismatch");
    if (!is_psd(b_extra, default_cone_tol(b_extra))) throw InputError("build_admissible: b_extra must be PSD");
    if (beta.rows() != d || beta.cols() != d) throw InputError("build_admissible: beta must be d x d");
    ParameterSet p;
    p.dim = d;
    p.m = m;
    p.mu = mu;
    p.B = SuperOperator::lyapunov(beta);
    for (const auto& g : conjugations) {
        if (g.rows() != d || g.cols() != d) throw InputError("build_admissible: conjugation must be d x d");
        p.B += SuperOperator::conjugation(g);
    }
    p.B += compensator(mu, d);
    const SymMatrix im = small_jump_mean(m, d);
    if (!im.all_finite()) throw InputError("build_admissible: m has infinite small-jump first moment");
    p.b = b_extra + im;
    check_structure(p);
    return p;
}

/// Restricts m and μ to ‖ξ‖ > 1/k; b and B are unchanged.
inline ParameterSet truncate(const ParameterSet& p, int k) {
    if (k < 1) throw InputError("truncate: k must be >= 1");
    const double cut = 1.0 / k;
    ParameterSet out;
    out.dim = p.dim;
    out.b = p.b;
    out.B = p.B;
    for (const auto& a : p.m.atoms)
        if (a.xi.norm() > cut) out.m.atoms.push_back(a);
    for (const auto& r : p.m.rays) {
        auto h = r.density.restricted(cut);
        if (!h.empty()) out.m.rays.push_back({r.direction, h});
    }
    for (const auto& a : p.mu.atoms)
        if (a.xi.norm() > cut) out.mu.atoms.push_back(a);
    for (const auto& r : p.mu.rays) {
        auto g = r.kernel.restricted(cut);
        if (!g.empty()) out.mu.rays.push_back({r.direction, r.weight, g});
    }
    out.truncation_level = p.truncation_level ? std::min(*p.truncation_level, k) : k;
    return out;
}

} // namespace affinehs
