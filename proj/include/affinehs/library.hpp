#pragma once

// Curated admissible parameter sets: hand-built benchmark sets at d = 2 and a
// seeded family of random admissible sets across d ∈ {1, 2, 3, 5}.

#include <cmath>
#include <string>
#include <vector>

#include "affinehs/params.hpp"
#include "affinehs/rng.hpp"
#include "affinehs/symcone.hpp"

namespace affinehs::library {

struct Entry {
    std::string name;
    ParameterSet params;
    SymMatrix x0;  // a representative initial state
    SymMatrix u;   // a representative Laplace argument
};

inline SymMatrix sym2(double a, double b, double c) {
    Matrix m(2, 2);
    m << a, b, b, c;
    return SymMatrix::from_matrix(m);
}

inline SymMatrix unit_direction(const SymMatrix& a) { return (1.0 / a.norm()) * a; }

/**
 * Finite-activity d = 2 sets used against Monte Carlo. Set 1 has one m atom
 * and one μ atom; the others mix small and large atoms, power and
 * exponential rays, and conjugation terms, so truncation at k = 4 and k = 16
 * gives different processes.
 */
inline std::vector<Entry> benchmark_sets() {
    std::vector<Entry> out;
    const Matrix beta_stable = (Matrix(2, 2) << -0.5, 0.1, 0.0, -0.4).finished();
    const SymMatrix x0 = sym2(0.6, 0.1, 0.4);
    const SymMatrix u = sym2(0.8, 0.2, 0.5);

    {
        ScalarJumpMeasure m;
        m.atoms.push_back({sym2(0.5, 0.1, 0.3), 1.0});
        OperatorJumpMeasure mu;
        mu.atoms.push_back({sym2(0.6, 0.2, 0.4), sym2(0.3, 0.05, 0.2)});
        out.push_back({"bench1_atoms", build_admissible(2, beta_stable, {}, mu, m, sym2(0.2, 0.0, 0.2)), x0, u});
    }
    {
        ScalarJumpMeasure m;
        m.atoms.push_back({sym2(0.15, 0.0, 0.05), 2.0});
        m.atoms.push_back({sym2(1.2, 0.3, 0.4), 0.5});
        OperatorJumpMeasure mu;
        mu.atoms.push_back({sym2(0.1, 0.05, 0.08), sym2(0.02, 0.0, 0.03)});
        mu.atoms.push_back({sym2(1.5, 0.0, 0.5), sym2(0.2, 0.1, 0.3)});
        out.push_back({"bench2_small_and_large_atoms", build_admissible(2, beta_stable, {}, mu, m, sym2(0.1, 0.02, 0.15)), x0, u});
    }
    {
        ScalarJumpMeasure m;
        m.rays.push_back({unit_direction(sym2(1.0, 0.3, 0.5)), RadialDensity::exponential(1.5, 2.0, 0.05)});
        OperatorJumpMeasure mu;
        mu.rays.push_back({unit_direction(sym2(0.7, 0.0, 1.0)), sym2(0.3, 0.1, 0.2), RadialDensity::power(0.5, 0.5, 0.02, 1.5)});
        out.push_back({"bench3_rays", build_admissible(2, beta_stable, {}, mu, m, sym2(0.2, 0.05, 0.1)), x0, u});
    }
    {
        ScalarJumpMeasure m;
        m.atoms.push_back({sym2(0.4, -0.1, 0.3), 0.8});
        m.atoms.push_back({sym2(0.1, 0.0, 0.2), 1.5});
        OperatorJumpMeasure mu;
        mu.rays.push_back({unit_direction(sym2(1.0, -0.2, 0.4)), sym2(0.25, 0.0, 0.25), RadialDensity::exponential(1.0, 3.0, 0.1)});
        const Matrix g = (Matrix(2, 2) << 0.3, 0.1, -0.1, 0.2).finished();
        out.push_back({"bench4_conjugation", build_admissible(2, beta_stable, {g}, mu, m, sym2(0.15, 0.0, 0.15)), x0, u});
    }
    {
        ScalarJumpMeasure m;
        m.atoms.push_back({sym2(0.9, 0.4, 0.3), 0.6});
        m.rays.push_back({unit_direction(sym2(0.2, 0.1, 1.0)), RadialDensity::power(0.4, 0.6, 0.1, 2.0)});
        OperatorJumpMeasure mu;
        mu.atoms.push_back({sym2(0.2, 0.1, 0.3), sym2(0.1, 0.05, 0.1)});
        mu.rays.push_back({unit_direction(sym2(0.5, 0.5, 0.5)), sym2(0.15, -0.05, 0.2), RadialDensity::power(0.3, 0.7, 0.05, 1.2)});
        const Matrix beta = (Matrix(2, 2) << -0.3, 0.2, -0.1, -0.6).finished();
        out.push_back({"bench5_mixed", build_admissible(2, beta, {}, mu, m, sym2(0.1, 0.0, 0.1)), x0, u});
    }
    {
        // no drift mean reversion and a growing Lyapunov part
        ScalarJumpMeasure m;
        m.atoms.push_back({sym2(0.3, 0.0, 0.3), 1.0});
        OperatorJumpMeasure mu;
        mu.atoms.push_back({sym2(0.3, 0.1, 0.2), sym2(0.2, 0.0, 0.1)});
        const Matrix beta = (Matrix(2, 2) << 0.1, 0.0, 0.05, 0.05).finished();
        out.push_back({"bench6_growing", build_admissible(2, beta, {}, mu, m, sym2(0.3, 0.1, 0.3)), x0, u});
    }
    return out;
}

/// Infinite-activity d = 2 ray sets (power-law kernels with rmin = 0).
inline std::vector<Entry> infinite_activity_sets() {
    std::vector<Entry> out;
    const SymMatrix x0 = sym2(0.5, 0.1, 0.5);
    const SymMatrix u = sym2(1.0, 0.3, 0.6);
    const Matrix beta = (Matrix(2, 2) << -0.4, 0.1, 0.0, -0.3).finished();
    const double alphas[] = {0.5, 0.3, 0.7, 0.5};
    for (int i = 0; i < 4; ++i) {
        OperatorJumpMeasure mu;
        mu.rays.push_back({unit_direction(sym2(1.0, 0.2 * i, 0.5 + 0.1 * i)), sym2(0.4, 0.1, 0.3),
                           RadialDensity::power(0.5, alphas[i], 0.0, 1.0 + 0.5 * i)});
        ScalarJumpMeasure m;
        if (i % 2 == 1) m.rays.push_back({unit_direction(sym2(0.3, 0.0, 1.0)), RadialDensity::power(0.5, alphas[i], 0.0, 1.0)});
        if (i == 3) mu.atoms.push_back({sym2(1.5, 0.0, 0.2), sym2(0.1, 0.0, 0.1)});
        out.push_back({"ray_inf_" + std::to_string(i + 1), build_admissible(2, beta, {}, mu, m, sym2(0.2, 0.0, 0.2)), x0, u});
    }
    return out;
}

namespace detail {

inline Matrix random_matrix(int d, CounterRng& rng, double scale) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = scale * rng.normal();
    return a;
}

/// PSD matrix with Frobenius norm exactly `norm`.
inline SymMatrix psd_with_norm(int d, CounterRng& rng, double norm) {
    SymMatrix a = random_psd(d, rng, 1.0);
    while (a.norm() == 0.0) a = random_psd(d, rng, 1.0);
    return (norm / a.norm()) * a;
}

inline double uniform(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

} // namespace detail

/**
 * Random admissible set number `index` at dimension d: stable-ish Lyapunov
 * drift, up to two conjugations, atoms on both sides of norm 1, and (when
 * `infinite`) power-law rays reaching down to r = 0.
 */
inline Entry random_set(int d, int index, bool infinite, std::uint64_t seed = 2024) {
    CounterRng rng = CounterRng::stream(seed, static_cast<std::uint64_t>(1000 * d + index));
    using detail::uniform;
    const Matrix beta = detail::random_matrix(d, rng, 0.25 / std::sqrt(d)) - 0.3 * Matrix::Identity(d, d);
    std::vector<Matrix> conj;
    const int n_conj = static_cast<int>(rng() % 3);
    for (int i = 0; i < n_conj; ++i) conj.push_back(detail::random_matrix(d, rng, 0.2 / std::sqrt(d)));

    OperatorJumpMeasure mu;
    const int n_mu_atoms = static_cast<int>(rng() % 3);
    for (int i = 0; i < n_mu_atoms; ++i)
        mu.atoms.push_back({detail::psd_with_norm(d, rng, uniform(rng, 0.2, 2.0)), detail::psd_with_norm(d, rng, uniform(rng, 0.05, 0.3))});
    ScalarJumpMeasure m;
    const int n_m_atoms = static_cast<int>(rng() % 3);
    for (int i = 0; i < n_m_atoms; ++i)
        m.atoms.push_back({detail::psd_with_norm(d, rng, uniform(rng, 0.2, 2.0)), uniform(rng, 0.2, 1.5)});

    if (infinite) {
        const double alpha = uniform(rng, 0.2, 0.8);
        mu.rays.push_back({detail::psd_with_norm(d, rng, 1.0), detail::psd_with_norm(d, rng, uniform(rng, 0.05, 0.3)),
                           RadialDensity::power(uniform(rng, 0.2, 0.6), alpha, 0.0, uniform(rng, 0.8, 2.0))});
        if (rng() % 2 == 0)
            m.rays.push_back({detail::psd_with_norm(d, rng, 1.0),
                              RadialDensity::power(uniform(rng, 0.2, 0.6), uniform(rng, 0.2, 0.8), 0.0, uniform(rng, 0.8, 2.0))});
    } else if (rng() % 2 == 0) {
        mu.rays.push_back({detail::psd_with_norm(d, rng, 1.0), detail::psd_with_norm(d, rng, uniform(rng, 0.05, 0.3)),
                           RadialDensity::exponential(uniform(rng, 0.3, 1.0), uniform(rng, 1.5, 4.0), uniform(rng, 0.02, 0.2))});
        m.rays.push_back({detail::psd_with_norm(d, rng, 1.0),
                          RadialDensity::power(uniform(rng, 0.2, 0.6), uniform(rng, 0.2, 0.8), uniform(rng, 0.05, 0.3), uniform(rng, 1.0, 2.0))});
    }
    const SymMatrix b_extra = detail::psd_with_norm(d, rng, uniform(rng, 0.05, 0.5));
    Entry e;
    e.name = "random_d" + std::to_string(d) + "_" + std::to_string(index) + (infinite ? "_inf" : "_fin");
    e.params = build_admissible(d, beta, conj, mu, m, b_extra);
    e.x0 = detail::psd_with_norm(d, rng, uniform(rng, 0.3, 1.5));
    e.u = detail::psd_with_norm(d, rng, uniform(rng, 0.3, 1.5));
    return e;
}

/// Every library set: benchmarks, infinite-activity ray sets and random sets (≥ 50 in total).
inline std::vector<Entry> all_sets() {
    std::vector<Entry> out = benchmark_sets();
    for (auto& e : infinite_activity_sets()) out.push_back(std::move(e));
    const std::pair<int, int> counts[] = {{1, 10}, {2, 14}, {3, 12}, {5, 8}};
    for (auto [d, n] : counts)
        for (int i = 0; i < n; ++i) out.push_back(random_set(d, i, i % 2 == 1));
    return out;
}

} // namespace affinehs::library
