#pragma once

// Shared test helpers: hand-rolled random generators, independent scalar
// oracles and goodness-of-fit statistics.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "affinehs/params.hpp"
#include "affinehs/symcone.hpp"

namespace testsupport {

using affinehs::Matrix;
using affinehs::SymMatrix;

// ---------------------------------------------------------------------------
// Generators (std::mt19937_64, independent of the library's CounterRng)
// ---------------------------------------------------------------------------

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double normal() { return std::normal_distribution<double>()(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

    Matrix matrix(int d, double scale = 1.0) {
        Matrix a(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a(i, j) = scale * normal();
        return a;
    }

    SymMatrix sym(int d, double scale = 1.0) {
        Matrix a = matrix(d, scale);
        return SymMatrix::from_matrix(0.5 * (a + a.transpose()));
    }

    /// PSD of random rank in [1, d].
    SymMatrix psd(int d, double scale = 1.0) {
        const int rank = integer(1, d);
        Matrix g = matrix(d).leftCols(rank);
        return SymMatrix::from_matrix(scale * g * g.transpose() / rank);
    }

    SymMatrix psd_unit(int d) {
        SymMatrix a = psd(d);
        return (1.0 / a.norm()) * a;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// d = 1 oracle: scalar model assembled from raw numbers
// ---------------------------------------------------------------------------

struct ScalarRayRaw {
    bool power;       // c r^{-1-a} or c e^{-a r}
    double c, a, rmin, rmax;
    double weight;    // μ weight (ignored for m rays)

    double density(double r) const { return power ? c * std::pow(r, -1.0 - a) : c * std::exp(-a * r); }
};

struct ScalarModel {
    double b_extra = 0.0;
    double beta = 0.0;
    std::vector<double> conj;                       // g's
    std::vector<std::pair<double, double>> m_atoms;   // (ξ, w)
    std::vector<std::pair<double, double>> mu_atoms;  // (ξ, M)
    std::vector<ScalarRayRaw> m_rays, mu_rays;
};

/// ∫_a^b r^p · c r^{-1-α} dr
inline double power_moment(const ScalarRayRaw& r, double p, double a, double b) {
    const double e = p - r.a;
    const double hi = std::isinf(b) ? 0.0 : std::pow(b, e);
    const double lo = a == 0.0 ? 0.0 : std::pow(a, e);
    return r.c * (hi - lo) / e;
}

/**
 * ∫_a^b (e^{-rs} − 1 + rs·[compensated]) h(r) dr over a piece on one side of r = 1.
 * Power law: termwise integration of the exponential series. Exponential
 * law: closed-form antiderivatives.
 */
inline double ray_piece(const ScalarRayRaw& r, double s, double a, double b, bool compensated) {
    a = std::max(a, r.rmin);
    b = std::min(b, r.rmax);
    if (!(a < b)) return 0.0;
    if (r.power) {
        double sum = 0.0, coeff = 1.0;  // (−s)^n / n!
        for (int n = 1; n < 200; ++n) {
            coeff *= -s / n;
            if (n == 1 && compensated) continue;
            const double term = coeff * power_moment(r, n, a, b);
            sum += term;
            if (n > 4 && std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
        }
        return sum;
    }
    const double l = r.a;
    auto ex = [](double rate, double x) { return std::isinf(x) ? 0.0 : std::exp(-rate * x); };
    const double e_s = r.c * (ex(l + s, a) - ex(l + s, b)) / (l + s);
    const double e_0 = r.c * (ex(l, a) - ex(l, b)) / l;
    double out = e_s - e_0;
    if (compensated) {
        auto anti = [&](double x) { return std::isinf(x) ? 0.0 : (x / l + 1.0 / (l * l)) * std::exp(-l * x); };
        out += s * r.c * (anti(a) - anti(b));
    }
    return out;
}

/// ∫ (e^{-rs} − 1 + rs·1{r≤1}) h(r) dr
inline double ray_kappa(const ScalarRayRaw& r, double s) {
    return ray_piece(r, s, 0.0, 1.0, true) + ray_piece(r, s, 1.0, affinehs::kInf, false);
}

/// ∫_0^1 r h(r) dr
inline double ray_small_first_moment(const ScalarRayRaw& r) {
    const double a = r.rmin, b = std::min(1.0, r.rmax);
    if (!(a < b)) return 0.0;
    if (r.power) return power_moment(r, 1.0, a, b);
    const double l = r.a;
    auto anti = [&](double x) { return (x / l + 1.0 / (l * l)) * std::exp(-l * x); };
    return r.c * (anti(a) - anti(b));
}

inline double kappa(double s, bool small) { return std::exp(-s) - 1.0 + (small ? s : 0.0); }

class ScalarOracle {
public:
    explicit ScalarOracle(const ScalarModel& m) : m_(m) {
        b_ = m.b_extra;
        for (auto [xi, w] : m.m_atoms)
            if (xi <= 1.0) b_ += w * xi;
        for (const auto& r : m.m_rays) b_ += ray_small_first_moment(r);
        B_ = 2.0 * m.beta;
        for (double g : m.conj) B_ += g * g;
        for (auto [xi, M] : m.mu_atoms)
            if (xi <= 1.0) B_ += M / xi;
        // μ ray: μ(dξ)/‖ξ‖² = weight·g(r)dr, so ∫χ(ξ)/‖ξ‖² ⟨μ,x⟩ contributes weight ∫_0^1 r g(r) dr
        for (const auto& r : m.mu_rays) B_ += r.weight * ray_small_first_moment(r);
    }

    double b() const { return b_; }
    double B() const { return B_; }

    double F(double u) const {
        double v = b_ * u;
        for (auto [xi, w] : m_.m_atoms) v -= w * kappa(xi * u, xi <= 1.0);
        for (const auto& r : m_.m_rays) v -= ray_kappa(r, u);
        return v;
    }

    double R(double u) const {
        double v = B_ * u;
        for (auto [xi, M] : m_.mu_atoms) v -= M / (xi * xi) * kappa(xi * u, xi <= 1.0);
        for (const auto& r : m_.mu_rays) v -= r.weight * ray_kappa(r, u);
        return v;
    }

    /// Classical RK4 on (φ, ψ) with fixed step dt; returns (φ(T), ψ(T)).
    std::pair<double, double> rk4(double u, double T, double dt) const {
        const long n = std::lround(T / dt);
        const double h = T / n;
        double phi = 0.0, psi = u;
        for (long i = 0; i < n; ++i) {
            const double k1 = R(psi), l1 = F(psi);
            const double k2 = R(psi + 0.5 * h * k1), l2 = F(psi + 0.5 * h * k1);
            const double k3 = R(psi + 0.5 * h * k2), l3 = F(psi + 0.5 * h * k2);
            const double k4 = R(psi + h * k3), l4 = F(psi + h * k3);
            psi += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            phi += h / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4);
        }
        return {phi, psi};
    }

private:
    ScalarModel m_;
    double b_ = 0.0;
    double B_ = 0.0;
};

inline affinehs::RadialDensity to_density(const ScalarRayRaw& r) {
    return r.power ? affinehs::RadialDensity::power(r.c, r.a, r.rmin, r.rmax)
                   : affinehs::RadialDensity::exponential(r.c, r.a, r.rmin, r.rmax);
}

/// The same model as a library parameter set, via the admissible builder.
inline affinehs::ParameterSet to_params(const ScalarModel& m) {
    using namespace affinehs;
    auto s = [](double v) { return SymMatrix::diag({v}); };
    ScalarJumpMeasure sm;
    for (auto [xi, w] : m.m_atoms) sm.atoms.push_back({s(xi), w});
    for (const auto& r : m.m_rays) sm.rays.push_back({s(1.0), to_density(r)});
    OperatorJumpMeasure mu;
    for (auto [xi, M] : m.mu_atoms) mu.atoms.push_back({s(xi), s(M)});
    for (const auto& r : m.mu_rays) mu.rays.push_back({s(1.0), s(r.weight), to_density(r)});
    std::vector<Matrix> conj;
    for (double g : m.conj) conj.push_back(Matrix::Constant(1, 1, g));
    return build_admissible(1, Matrix::Constant(1, 1, m.beta), conj, mu, sm, s(m.b_extra));
}

/// Ten scalar models: atoms on both sides of norm 1, conjugations, power and exponential rays.
inline std::vector<ScalarModel> scalar_models() {
    std::vector<ScalarModel> out;
    {
        ScalarModel m;  // one m atom, one μ atom beyond norm 1
        m.beta = -0.5, m.b_extra = 0.3;
        m.m_atoms = {{2.0, 1.0}};
        m.mu_atoms = {{2.0, 1.0}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // small atoms, compensated
        m.beta = -0.2, m.b_extra = 0.1;
        m.m_atoms = {{0.3, 2.0}, {0.8, 0.5}};
        m.mu_atoms = {{0.5, 0.4}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // growing drift with conjugation
        m.beta = 0.1, m.b_extra = 0.5;
        m.conj = {0.4};
        m.mu_atoms = {{1.5, 0.3}, {0.2, 0.1}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // only μ, norm exactly 1
        m.beta = -1.0;
        m.mu_atoms = {{1.0, 0.8}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // many atoms
        m.beta = -0.3, m.b_extra = 0.2;
        m.conj = {0.2, 0.3};
        m.m_atoms = {{0.1, 3.0}, {1.2, 0.4}, {3.0, 0.2}};
        m.mu_atoms = {{0.05, 0.01}, {0.7, 0.2}, {2.5, 0.5}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // no jumps at all
        m.beta = -0.4, m.b_extra = 1.0;
        m.conj = {0.5};
        out.push_back(m);
    }
    {
        ScalarModel m;  // exponential rays
        m.beta = -0.5, m.b_extra = 0.1;
        m.m_rays = {{false, 1.5, 2.0, 0.05, affinehs::kInf, 0.0}};
        m.mu_rays = {{false, 1.0, 3.0, 0.1, affinehs::kInf, 0.3}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // infinite-activity power ray in μ
        m.beta = -0.3, m.b_extra = 0.2;
        m.mu_rays = {{true, 0.5, 0.5, 0.0, 1.5, 0.4}};
        m.m_atoms = {{1.5, 0.6}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // infinite-activity power rays on both sides
        m.beta = -0.4, m.b_extra = 0.05;
        m.m_rays = {{true, 0.4, 0.3, 0.0, 1.0, 0.0}};
        m.mu_rays = {{true, 0.3, 0.7, 0.0, 2.0, 0.5}};
        out.push_back(m);
    }
    {
        ScalarModel m;  // mixed: power ray bounded away from 0 plus atoms
        m.beta = 0.05, m.b_extra = 0.3;
        m.conj = {0.3};
        m.m_rays = {{true, 0.5, 0.6, 0.1, 2.0, 0.0}};
        m.mu_rays = {{true, 0.4, 0.4, 0.05, 1.2, 0.2}};
        m.mu_atoms = {{2.0, 0.2}};
        out.push_back(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed forms and statistics
// ---------------------------------------------------------------------------

/// e^{tβᵀ} u e^{tβ}
inline SymMatrix lyapunov_dual_closed_form(const Matrix& beta, const SymMatrix& u, double t) {
    const Matrix e = (t * beta).exp();
    return SymMatrix::from_matrix(e.transpose() * u.matrix() * e);
}

/// e^{tβ} x e^{tβᵀ}
inline SymMatrix lyapunov_closed_form(const Matrix& beta, const SymMatrix& x, double t) {
    const Matrix e = (t * beta).exp();
    return SymMatrix::from_matrix(e * x.matrix() * e.transpose());
}

/// Kolmogorov–Smirnov statistic of samples against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

/// Least-squares slope of log(err) against log(h).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace testsupport
