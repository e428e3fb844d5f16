#include <gtest/gtest.h>

#include <cmath>

#include "affinehs/symcone.hpp"
#include "support.hpp"

using namespace affinehs;
using testsupport::Gen;

namespace {

SymMatrix E(int d, int i, int j) { return SymMatrix::unit(d, i, j); }

} // namespace

TEST(SymMatrix, InnerExamples) {
    EXPECT_DOUBLE_EQ(inner(SymMatrix::identity(2), SymMatrix::identity(2)), 2.0);
    EXPECT_DOUBLE_EQ(inner(SymMatrix::diag({1.0, 4.0}), SymMatrix::zero(2)), 0.0);
    EXPECT_DOUBLE_EQ(inner(E(2, 0, 0), E(2, 1, 1)), 0.0);
    EXPECT_THROW(inner(SymMatrix::identity(2), SymMatrix::identity(3)), InputError);
}

TEST(SymMatrix, MinEigenvalueExamples) {
    EXPECT_NEAR(min_eigenvalue(SymMatrix::identity(2)), 1.0, 1e-14);
    EXPECT_NEAR(min_eigenvalue(SymMatrix::diag({1.0, -3.0})), -3.0, 1e-14);
    Vector v(3);
    v << 1.0, -2.0, 0.5;
    EXPECT_NEAR(min_eigenvalue(SymMatrix::outer(v)), 0.0, 1e-12);
}

TEST(SymMatrix, ConeOrderExamples) {
    EXPECT_TRUE(cone_leq(SymMatrix::zero(2), SymMatrix::identity(2), 0.0));
    EXPECT_FALSE(cone_leq(SymMatrix::identity(2), SymMatrix::zero(2), 1e-12));
    Gen g(1);
    const SymMatrix a = g.sym(3);
    EXPECT_TRUE(cone_leq(a, a, 0.0));
}

TEST(SymMatrix, ChiIncludesUnitSphere) {
    EXPECT_EQ(chi(0.5 * E(2, 0, 0)), 0.5 * E(2, 0, 0));
    EXPECT_EQ(chi(2.0 * E(2, 0, 0)), SymMatrix::zero(2));
    EXPECT_EQ(chi(E(2, 0, 0)), E(2, 0, 0));
}

TEST(SymMatrix, FromSymmetricRejectsAsymmetry) {
    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    EXPECT_THROW(SymMatrix::from_symmetric(a), InputError);
    a(1, 0) = 2;
    EXPECT_NO_THROW(SymMatrix::from_symmetric(a));
}

TEST(SymMatrix, ClipRemovesNegativePart) {
    auto [c, removed] = clip_to_cone(SymMatrix::diag({2.0, -0.5}));
    EXPECT_EQ(c.matrix(), SymMatrix::diag({2.0, 0.0}).matrix());
    EXPECT_NEAR(removed, 0.5, 1e-15);
}

TEST(VecBasis, IsometryProperty) {
    Gen g(2);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = g.integer(1, 6);
        const VecBasis basis(d);
        const SymMatrix a = g.sym(d), b = g.sym(d);
        EXPECT_LE(std::abs(inner(a, b) - basis.vec(a).dot(basis.vec(b))), 1e-13 * a.norm() * b.norm());
        EXPECT_LE((basis.unvec(basis.vec(a)) - a).norm(), 1e-14 * a.norm());
    }
}

TEST(SuperOperator, AdjointConsistencyProperty) {
    Gen g(3);
    for (int trial = 0; trial < 120; ++trial) {
        const int d = g.integer(1, 5);
        const int n = d * (d + 1) / 2;
        std::vector<SuperOperator> ops = {
            SuperOperator::lyapunov(g.matrix(d)),
            SuperOperator::conjugation(g.matrix(d)),
            SuperOperator::rank_one(g.sym(d), g.sym(d), g.normal()),
            SuperOperator::dense(g.matrix(n), d),
        };
        ops.push_back(ops[0] + 0.5 * ops[1] - ops[2] + ops[3]);
        for (const auto& op : ops) {
            const SymMatrix x = g.sym(d), y = g.sym(d);
            const double lhs = inner(op.apply(x), y);
            const double rhs = inner(x, op.apply_adjoint(y));
            EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(lhs)) * (1.0 + x.norm() * y.norm()));
            EXPECT_LE((op.adjoint().apply(y) - op.apply_adjoint(y)).norm(), 1e-12 * (1.0 + y.norm()));
        }
    }
}

TEST(SuperOperator, CoordinatesReproduceApplication) {
    Gen g(4);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = g.integer(1, 4);
        const VecBasis basis(d);
        const SuperOperator op = SuperOperator::lyapunov(g.matrix(d)) + SuperOperator::conjugation(g.matrix(d)) +
                                 SuperOperator::rank_one(g.sym(d), g.sym(d));
        const SymMatrix x = g.sym(d);
        const SymMatrix via_coords = basis.unvec(op.coordinates() * basis.vec(x));
        EXPECT_LE((via_coords - op.apply(x)).norm(), 1e-12 * (1.0 + x.norm()));
    }
}

TEST(SuperOperator, NormOfIdentity) {
    EXPECT_NEAR(SuperOperator::identity(3).norm(), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(SuperOperator::zero(2).norm(), 0.0);
}

TEST(Cone, SelfDualityProxyProperty) {
    Gen g(5);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = g.integer(1, 5);
        const SymMatrix x = g.psd(d);
        const SymMatrix y = x + g.psd(d, g.uniform(0.0, 2.0));
        EXPECT_LE(x.norm(), y.norm() + 1e-10);
    }
}

TEST(ExpmAction, Examples) {
    Gen g(6);
    const SymMatrix v = g.sym(3);
    EXPECT_LE((expm_action(SuperOperator::zero(3), 2.5, v) - v).norm(), 1e-15);

    const SuperOperator c = 0.7 * SuperOperator::identity(1);  // x ↦ 0.7x
    EXPECT_NEAR(expm_action(c, 1.3, SymMatrix::diag({2.0}))(0, 0), 2.0 * std::exp(0.7 * 1.3), 1e-13);

    for (int trial = 0; trial < 20; ++trial) {
        const int d = g.integer(1, 5);
        const Matrix beta = g.matrix(d, 0.5);
        const SymMatrix x = g.sym(d);
        const double t = g.uniform(0.0, 2.0);
        const SymMatrix got = expm_action(SuperOperator::lyapunov(beta), t, x);
        const SymMatrix want = testsupport::lyapunov_closed_form(beta, x, t);
        EXPECT_LE((got.matrix() - want.matrix()).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + want.norm()));
    }
}

TEST(ExpmAction, SemigroupLawProperty) {
    Gen g(7);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = g.integer(1, 4);
        const SuperOperator L = SuperOperator::lyapunov(g.matrix(d, 0.5)) + SuperOperator::conjugation(g.matrix(d, 0.5));
        const double nl = L.norm();
        const double s = g.uniform(0.0, 10.0 / nl), t = g.uniform(0.0, 10.0 / nl);
        const SymMatrix v = g.sym(d);
        const Propagator P(L);
        const SymMatrix whole = P.apply(s + t, v);
        EXPECT_LE((whole - P.apply(s, P.apply(t, v))).norm(), 1e-11 * std::exp(nl * (s + t)) * v.norm());
    }
}

TEST(ExpmAction, LyapunovPositivityProperty) {
    Gen g(8);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = g.integer(1, 5);
        const SymMatrix v = g.psd(d);
        const SymMatrix out = expm_action(SuperOperator::lyapunov(g.matrix(d)), g.uniform(0.0, 3.0), v);
        EXPECT_GE(min_eigenvalue(out), -1e-10 * (1.0 + out.norm()));
    }
}

TEST(ExpmAction, NegativeTimeIsRejected) {
    EXPECT_THROW(expm_action(SuperOperator::identity(2), -1.0, SymMatrix::identity(2)), InputError);
}

TEST(ExpmAction, OverflowIsReported) {
    EXPECT_THROW(expm_action(1e3 * SuperOperator::identity(2), 10.0, SymMatrix::identity(2)), NumericalError);
}
