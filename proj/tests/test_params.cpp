#include <gtest/gtest.h>

#include <cmath>

#include "affinehs/library.hpp"
#include "affinehs/params.hpp"
#include "support.hpp"

using namespace affinehs;
using testsupport::Gen;

namespace {

SymMatrix E(int d, int i, int j) { return SymMatrix::unit(d, i, j); }

OperatorRay power_ray(const SymMatrix& D, const SymMatrix& M, double alpha, double rmin = 0.0, double rmax = 1.0) {
    return {D, M, RadialDensity::power(1.0, alpha, rmin, rmax)};
}

} // namespace

TEST(RadialDensity, ClosedFormMoments) {
    const auto h = RadialDensity::power(1.0, 0.5, 0.0, 1.0);
    EXPECT_NEAR(h.moment(2.0), 2.0 / 3.0, 1e-15);
    EXPECT_TRUE(std::isinf(h.moment(0.0)));
    const auto e = RadialDensity::exponential(2.0, 3.0, 0.5);
    EXPECT_NEAR(e.moment(0.0), 2.0 / 3.0 * std::exp(-1.5), 1e-15);
    EXPECT_NEAR(e.moment(1.0), 2.0 * (0.5 / 3.0 + 1.0 / 9.0) * std::exp(-1.5), 1e-15);
    EXPECT_THROW(RadialDensity::power(1.0, 0.5, 1.0, 0.5), InputError);
    EXPECT_THROW(RadialDensity::exponential(1.0, -1.0), InputError);
}

TEST(RadialDensity, QuadratureMatchesClosedFormProperty) {
    Gen g(11);
    for (int trial = 0; trial < 60; ++trial) {
        const bool pw = trial % 2 == 0;
        const double rmin = pw && trial % 4 == 0 ? 0.0 : g.uniform(0.01, 0.5);
        const RadialDensity h = pw ? RadialDensity::power(g.uniform(0.2, 2.0), g.uniform(0.1, 0.9), rmin, g.uniform(0.8, 3.0))
                                   : RadialDensity::exponential(g.uniform(0.2, 2.0), g.uniform(0.5, 4.0), rmin);
        for (double p : {1.0, 2.0}) {
            const double q = radial_integral(h, p, [](double) { return 1.0; });
            EXPECT_NEAR(q, h.moment(p), 1e-8 * (1.0 + h.moment(p))) << "trial " << trial << " p " << p;
        }
    }
}

TEST(Integrate, ScalarExamples) {
    ScalarJumpMeasure m;
    const SymMatrix xi = SymMatrix::diag({0.3, 1.2});
    m.atoms.push_back({xi, 3.0});
    const auto sq = [](const SymMatrix& a) { return a.norm() * a.norm(); };
    EXPECT_NEAR(integrate_scalar(m, sq), 3.0 * xi.norm() * xi.norm(), 1e-14);
    EXPECT_DOUBLE_EQ(integrate_scalar(ScalarJumpMeasure{}, sq), 0.0);
}

TEST(Integrate, OperatorExamples) {
    OperatorJumpMeasure mu;
    const SymMatrix M = SymMatrix::diag({0.4, 0.2});
    mu.atoms.push_back({E(2, 0, 0), M});
    EXPECT_EQ(integrate_operator(mu, 2, [](const SymMatrix&) { return 1.0; }).matrix(), M.matrix());
    EXPECT_EQ(integrate_operator(mu, 2, [](const SymMatrix&) { return 0.0; }).matrix(), SymMatrix(2).matrix());

    // μ-style ray with g = r^{-1.5} on (0,1]: μ has density r²g, so ∫ 1 dμ = M∫r^{0.5} = (2/3)M
    OperatorJumpMeasure ray;
    ray.rays.push_back(power_ray(E(2, 0, 0), M, 0.5));
    const SymMatrix got = integrate_operator(ray, 2, [](const SymMatrix&) { return 1.0; });
    EXPECT_LE((got - (2.0 / 3.0) * M).norm(), 1e-8);
    EXPECT_LE((got - total_mass(ray, 2)).norm(), 1e-8);
    // the kernel form with f = ‖ξ‖² is the same measure
    const SymMatrix via_kernel = integrate_kernel(ray, 2, [](const SymMatrix& a) { return a.norm() * a.norm(); });
    EXPECT_LE((via_kernel - (2.0 / 3.0) * M).norm(), 1e-8);
}

TEST(Validate, IdentityDriftPasses) {
    ParameterSet p;
    p.dim = 2;
    p.b = SymMatrix::identity(2);
    p.B = SuperOperator::lyapunov(-Matrix::Identity(2, 2));
    const auto rep = validate_admissibility(p);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_EQ(rep.pairs_checked, 200);
}

TEST(Validate, NegativeDriftFailsWithWitness) {
    ParameterSet p;
    p.dim = 2;
    p.b = -1.0 * E(2, 0, 0);
    p.B = SuperOperator::zero(2);
    const auto rep = validate_admissibility(p);
    EXPECT_FALSE(rep.all_pass());
    const auto& ii = rep.at("ii");
    EXPECT_FALSE(ii.pass);
    ASSERT_TRUE(ii.witness_u.has_value());
    EXPECT_LE((*ii.witness_u - E(2, 0, 0)).norm(), 1e-12);
    EXPECT_NEAR(ii.violation, 1.0, 1e-12);
}

TEST(Validate, NonQuasiMonotoneBFails) {
    ParameterSet p;
    p.dim = 2;
    p.b = SymMatrix::identity(2);
    p.B = -1.0 * SuperOperator::conjugation(Matrix::Identity(2, 2));
    p.B += SuperOperator::rank_one(E(2, 0, 0), E(2, 1, 1), -1.0);  // pushes mass out of the cone
    EXPECT_FALSE(validate_admissibility(p).at("iv").pass);
}

TEST(Validate, InfiniteSecondMomentFails) {
    ParameterSet p;
    p.dim = 1;
    p.b = SymMatrix::identity(1);
    p.B = SuperOperator::zero(1);
    p.m.rays.push_back({SymMatrix::identity(1), RadialDensity::power(1.0, 0.5, 1.0, kInf)});
    EXPECT_FALSE(validate_admissibility(p).at("i_a").pass);
}

TEST(Validate, BuilderOutputPassesProperty) {
    for (int i = 0; i < 60; ++i) {
        const int d = 1 + i % 5;
        const auto e = library::random_set(d, i, i % 3 == 0, 77);
        const auto rep = validate_admissibility(e.params, 1e-9, 100, static_cast<std::uint64_t>(i));
        EXPECT_TRUE(rep.all_pass()) << e.name;
    }
}

TEST(Validate, LibraryPasses) {
    const auto sets = library::all_sets();
    EXPECT_GE(sets.size(), 50u);
    for (const auto& e : sets) EXPECT_TRUE(validate_admissibility(e.params).all_pass()) << e.name;
}

TEST(Builder, ScalarExample) {
    const auto p = build_admissible(1, -Matrix::Identity(1, 1), {}, {}, {}, SymMatrix::identity(1));
    EXPECT_DOUBLE_EQ(p.b(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(p.B.apply(SymMatrix::diag({3.0}))(0, 0), -6.0);
}

TEST(Builder, SymmetricBetaGivesSelfAdjointB) {
    Gen g(12);
    const SymMatrix s = g.sym(3);
    const auto p = build_admissible(3, s.matrix(), {}, {}, {}, SymMatrix::identity(3));
    const SymMatrix x = g.sym(3);
    EXPECT_LE((p.B.apply(x) - p.B.apply_adjoint(x)).norm(), 1e-14);
}

TEST(Builder, LargeAtomHasNoCompensator) {
    OperatorJumpMeasure mu;
    mu.atoms.push_back({2.0 * E(2, 0, 0), E(2, 1, 1)});
    const auto p = build_admissible(2, Matrix::Zero(2, 2), {}, mu, {}, SymMatrix::identity(2));
    Gen g(13);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(p.B.apply(g.sym(2)).norm(), 0.0);
}

TEST(Builder, RejectsNonPsdDrift) {
    EXPECT_THROW(build_admissible(2, Matrix::Zero(2, 2), {}, {}, {}, SymMatrix::diag({1.0, -0.1})), InputError);
}

TEST(Structure, RejectsBadComponents) {
    auto base = library::benchmark_sets()[0].params;
    {
        auto p = base;
        p.m.atoms[0].xi = SymMatrix::diag({1.0, -0.5});
        EXPECT_THROW(check_structure(p), InputError);
    }
    {
        auto p = base;
        p.m.rays.push_back({SymMatrix::identity(2), RadialDensity::exponential(1.0, 1.0)});  // norm √2
        EXPECT_THROW(check_structure(p), InputError);
    }
    {
        auto p = base;
        p.mu.atoms[0].mass = SymMatrix::diag({1.0, -1.0});
        EXPECT_THROW(check_structure(p), InputError);
    }
    {
        auto p = base;
        p.b = SymMatrix::identity(3);
        EXPECT_THROW(check_structure(p), InputError);
    }
}

TEST(Truncate, Examples) {
    OperatorJumpMeasure mu;
    mu.atoms.push_back({1.5 * E(2, 0, 0), E(2, 1, 1)});
    const auto p = build_admissible(2, Matrix::Zero(2, 2), {}, mu, {}, SymMatrix::identity(2));
    const auto p1 = truncate(p, 1);
    ASSERT_EQ(p1.mu.atoms.size(), 1u);
    EXPECT_EQ(p1.mu.atoms[0].xi, p.mu.atoms[0].xi);

    OperatorJumpMeasure ray;
    ray.rays.push_back(power_ray(E(2, 0, 0), E(2, 0, 0), 0.5));
    const auto q = build_admissible(2, Matrix::Zero(2, 2), {}, ray, {}, SymMatrix::identity(2));
    const auto q4 = truncate(q, 4);
    ASSERT_EQ(q4.mu.rays.size(), 1u);
    EXPECT_DOUBLE_EQ(q4.mu.rays[0].kernel.rmin(), 0.25);
    EXPECT_DOUBLE_EQ(q4.mu.rays[0].kernel.rmax(), 1.0);
    EXPECT_EQ(q4.truncation_level, 4);
    EXPECT_EQ(q4.b, q.b);
    EXPECT_THROW(truncate(q, 0), InputError);
}

TEST(Truncate, ActivityOfPowerRay) {
    for (int k : {1, 2, 4, 9, 16, 64}) {
        const auto h = RadialDensity::power(1.0, 0.5, 0.0, 1.0).restricted(1.0 / k);
        const double closed = 2.0 * (std::sqrt(static_cast<double>(k)) - 1.0);
        if (k == 1) {
            EXPECT_TRUE(h.empty());
            continue;
        }
        EXPECT_NEAR(h.moment(0.0), closed, 1e-12);
        EXPECT_NEAR(radial_integral(h, 0.0, [](double) { return 1.0; }), closed, 1e-8);
    }
}

TEST(Truncate, MakesActivityFinite) {
    for (const auto& e : library::infinite_activity_sets()) {
        EXPECT_FALSE(finite_activity(e.params));
        EXPECT_TRUE(finite_activity(truncate(e.params, 8)));
    }
}

TEST(RandomPairs, OrthogonalAndPsd) {
    CounterRng rng(99, 0);
    for (int i = 0; i < 200; ++i) {
        const int d = 1 + i % 6;
        auto [u, x] = random_orthogonal_pair(d, rng);
        EXPECT_NEAR(inner(u, x), 0.0, 1e-12);
        EXPECT_GE(min_eigenvalue(u), -1e-12);
        EXPECT_GE(min_eigenvalue(x), -1e-12);
    }
}
