#pragma once

// Symmetric matrices with the Frobenius pairing, the PSD cone and its order,
// the truncation function, and linear maps on the symmetric-matrix space.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "affinehs/errors.hpp"

namespace affinehs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * A real symmetric d×d matrix. Every constructor and arithmetic operation
 * leaves the entries exactly symmetric.
 */
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : a_(Matrix::Zero(dim, dim)) {
        if (dim <= 0) throw InputError("SymMatrix: dimension must be positive");
    }

    static SymMatrix zero(int dim) { return SymMatrix(dim); }

    static SymMatrix identity(int dim) {
        SymMatrix s(dim);
        s.a_.setIdentity();
        return s;
    }

    /// Symmetric unit: ones at (i,j) and (j,i).
    static SymMatrix unit(int dim, int i, int j) {
        SymMatrix s(dim);
        s.a_(i, j) = 1.0;
        s.a_(j, i) = 1.0;
        return s;
    }

    static SymMatrix diag(const Vector& d) {
        SymMatrix s(static_cast<int>(d.size()));
        s.a_.diagonal() = d;
        return s;
    }

    static SymMatrix diag(std::initializer_list<double> d) {
        Vector v(static_cast<Eigen::Index>(d.size()));
        int i = 0;
        for (double x : d) v(i++) = x;
        return diag(v);
    }

    /// v vᵀ
    static SymMatrix outer(const Vector& v) { return from_matrix(v * v.transpose()); }

    /// Symmetric part (A + Aᵀ)/2 of an arbitrary square matrix.
    static SymMatrix from_matrix(const Matrix& a) {
        if (a.rows() != a.cols() || a.rows() == 0)
            throw InputError("SymMatrix: matrix must be square and non-empty");
        SymMatrix s;
        s.a_ = 0.5 * (a + a.transpose());
        return s;
    }

    /// Accepts a matrix only if it is symmetric to `rel_tol`·max(1, max|a_ij|).
    static SymMatrix from_symmetric(const Matrix& a, double rel_tol = 1e-12) {
        if (a.rows() != a.cols() || a.rows() == 0)
            throw InputError("SymMatrix: matrix must be square and non-empty");
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
        if (!(asym <= rel_tol * scale))
            throw InputError("SymMatrix: asymmetry " + std::to_string(asym) + " exceeds tolerance");
        return from_matrix(a);
    }

    int dim() const { return static_cast<int>(a_.rows()); }
    double operator()(int i, int j) const { return a_(i, j); }
    const Matrix& matrix() const { return a_; }

    double norm() const { return a_.norm(); }
    double trace() const { return a_.trace(); }
    bool all_finite() const { return a_.allFinite(); }

    SymMatrix& operator+=(const SymMatrix& o) {
        check_same(o);
        a_ += o.a_;
        return *this;
    }
    SymMatrix& operator-=(const SymMatrix& o) {
        check_same(o);
        a_ -= o.a_;
        return *this;
    }
    SymMatrix& operator*=(double s) {
        a_ *= s;
        return *this;
    }

    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
    friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
    friend SymMatrix operator/(SymMatrix a, double s) { return a *= (1.0 / s); }
    friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

    bool operator==(const SymMatrix& o) const {
        return dim() == o.dim() && a_ == o.a_;
    }

private:
    void check_same(const SymMatrix& o) const {
        if (o.dim() != dim()) throw InputError("SymMatrix: dimension mismatch");
    }

    Matrix a_;
};

/// Frobenius (Hilbert–Schmidt) pairing Σ AᵢⱼBᵢⱼ.
inline double inner(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim()) throw InputError("inner: dimension mismatch");
    return a.matrix().cwiseProduct(b.matrix()).sum();
}

struct SpectralDecomposition {
    Vector values;   // ascending
    Matrix vectors;  // columns are orthonormal eigenvectors
};

inline SpectralDecomposition spectral(const SymMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
    if (solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver did not converge (dim " +
                             std::to_string(a.dim()) + ")");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double min_eigenvalue(const SymMatrix& a) {
    if (a.dim() == 1) return a(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver did not converge (dim " +
                             std::to_string(a.dim()) + ")");
    return solver.eigenvalues()(0);
}

/// Unit eigenvector of the smallest eigenvalue.
inline Vector min_eigenvector(const SymMatrix& a) {
    return spectral(a).vectors.col(0);
}

inline bool is_psd(const SymMatrix& a, double tol) { return min_eigenvalue(a) >= -tol; }

/// A ≤ B in the cone order, up to `tol`.
inline bool cone_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
    return min_eigenvalue(b - a) >= -tol;
}

/// Tolerance used for cone checks when none is given: 1e-9·(1 + ‖A‖).
inline double default_cone_tol(const SymMatrix& a) { return 1e-9 * (1.0 + a.norm()); }

/// χ(ξ) = ξ·1{‖ξ‖ ≤ 1}; the unit sphere belongs to the small jumps.
inline SymMatrix chi(const SymMatrix& xi) {
    return xi.norm() <= 1.0 ? xi : SymMatrix::zero(xi.dim());
}

/// Projection onto the cone by clipping negative eigenvalues. Returns the
/// projected matrix and the Frobenius size of the removed part.
inline std::pair<SymMatrix, double> clip_to_cone(const SymMatrix& a) {
    auto sd = spectral(a);
    Vector lam = sd.values;
    double removed = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < 0) {
            removed += lam(i) * lam(i);
            lam(i) = 0;
        }
    }
    Matrix out = sd.vectors * lam.asDiagonal() * sd.vectors.transpose();
    return {SymMatrix::from_matrix(out), std::sqrt(removed)};
}

/**
 * Orthonormal coordinates on the d(d+1)/2-dimensional space of symmetric
 * matrices: the diagonal units Eᵢᵢ first, then (Eᵢⱼ+Eⱼᵢ)/√2 for i<j in
 * row-major order. vec and unvec are inverse isometries.
 */
class VecBasis {
public:
    explicit VecBasis(int dim) : dim_(dim) {
        if (dim <= 0) throw InputError("VecBasis: dimension must be positive");
    }

    int dim() const { return dim_; }
    int size() const { return dim_ * (dim_ + 1) / 2; }

    Vector vec(const SymMatrix& a) const {
        if (a.dim() != dim_) throw InputError("VecBasis: dimension mismatch");
        Vector v(size());
        int k = 0;
        for (int i = 0; i < dim_; ++i) v(k++) = a(i, i);
        for (int i = 0; i < dim_; ++i)
            for (int j = i + 1; j < dim_; ++j) v(k++) = kSqrt2 * a(i, j);
        return v;
    }

    SymMatrix unvec(const Vector& v) const {
        if (v.size() != size()) throw InputError("VecBasis: coordinate length mismatch");
        Matrix a(dim_, dim_);
        int k = 0;
        for (int i = 0; i < dim_; ++i) a(i, i) = v(k++);
        for (int i = 0; i < dim_; ++i)
            for (int j = i + 1; j < dim_; ++j) {
                const double x = v(k++) / kSqrt2;
                a(i, j) = x;
                a(j, i) = x;
            }
        return SymMatrix::from_matrix(a);
    }

    SymMatrix element(int k) const {
        Vector e = Vector::Zero(size());
        e(k) = 1.0;
        return unvec(e);
    }

private:
    static constexpr double kSqrt2 = 1.41421356237309504880;
    int dim_;
};

/**
 * A linear map on symmetric matrices, kept as a weighted sum of structured
 * terms so that the adjoint is available exactly:
 *
 *   lyapunov(β):        x ↦ βx + xβᵀ          adjoint  x ↦ βᵀx + xβ
 *   conjugation(G):     x ↦ GxGᵀ              adjoint  x ↦ GᵀxG
 *   rank_one(M, D):     x ↦ ⟨M,x⟩D            adjoint  x ↦ ⟨D,x⟩M
 *   dense(A):           x ↦ unvec(A·vec x)    adjoint  Aᵀ
 */
class SuperOperator {
public:
    struct Lyapunov {
        Matrix beta;
    };
    struct Conjugation {
        Matrix g;
    };
    struct RankOne {
        SymMatrix functional;
        SymMatrix direction;
    };
    struct Dense {
        Matrix coords;
    };
    using Term = std::variant<Lyapunov, Conjugation, RankOne, Dense>;
    struct WeightedTerm {
        double coeff;
        Term term;
    };

    SuperOperator() = default;
    explicit SuperOperator(int dim) : dim_(dim) {
        if (dim <= 0) throw InputError("SuperOperator: dimension must be positive");
    }

    static SuperOperator zero(int dim) { return SuperOperator(dim); }

    static SuperOperator identity(int dim) {
        return lyapunov(0.5 * Matrix::Identity(dim, dim));
    }

    static SuperOperator lyapunov(const Matrix& beta) {
        check_square(beta, "lyapunov");
        SuperOperator op(static_cast<int>(beta.rows()));
        op.terms_.push_back({1.0, Lyapunov{beta}});
        return op;
    }

    static SuperOperator conjugation(const Matrix& g) {
        check_square(g, "conjugation");
        SuperOperator op(static_cast<int>(g.rows()));
        op.terms_.push_back({1.0, Conjugation{g}});
        return op;
    }

    static SuperOperator rank_one(const SymMatrix& functional, const SymMatrix& direction,
                                  double coeff = 1.0) {
        if (functional.dim() != direction.dim())
            throw InputError("rank_one: dimension mismatch");
        SuperOperator op(functional.dim());
        op.terms_.push_back({coeff, RankOne{functional, direction}});
        return op;
    }

    static SuperOperator dense(const Matrix& coords, int dim) {
        const int n = dim * (dim + 1) / 2;
        if (coords.rows() != n || coords.cols() != n)
            throw InputError("dense: coordinate matrix must be " + std::to_string(n) + "x" +
                             std::to_string(n));
        SuperOperator op(dim);
        op.terms_.push_back({1.0, Dense{coords}});
        return op;
    }

    static SuperOperator from_term(int dim, WeightedTerm wt) {
        SuperOperator op(dim);
        op.terms_.push_back(std::move(wt));
        return op;
    }

    int dim() const { return dim_; }
    const std::vector<WeightedTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    SuperOperator& operator+=(const SuperOperator& o) {
        if (dim_ == 0) dim_ = o.dim_;
        if (o.dim_ != dim_ && o.dim_ != 0) throw InputError("SuperOperator: dimension mismatch");
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        return *this;
    }
    friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }

    SuperOperator& operator*=(double s) {
        for (auto& t : terms_) t.coeff *= s;
        return *this;
    }
    friend SuperOperator operator*(double s, SuperOperator a) { return a *= s; }
    friend SuperOperator operator-(SuperOperator a) { return a *= -1.0; }
    friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) {
        return a += (-1.0) * b;
    }

    SymMatrix apply(const SymMatrix& x) const { return evaluate(x, false); }
    SymMatrix apply_adjoint(const SymMatrix& y) const { return evaluate(y, true); }
    SymMatrix operator()(const SymMatrix& x) const { return apply(x); }

    SuperOperator adjoint() const {
        SuperOperator out(dim_);
        for (const auto& wt : terms_) {
            Term t = std::visit(
                [](const auto& term) -> Term {
                    using T = std::decay_t<decltype(term)>;
                    if constexpr (std::is_same_v<T, Lyapunov>) return Lyapunov{term.beta.transpose()};
                    else if constexpr (std::is_same_v<T, Conjugation>) return Conjugation{term.g.transpose()};
                    else if constexpr (std::is_same_v<T, RankOne>) return RankOne{term.direction, term.functional};
                    else return Dense{term.coords.transpose()};
                },
                wt.term);
            out.terms_.push_back({wt.coeff, std::move(t)});
        }
        return out;
    }

    /// n×n matrix of the map in VecBasis coordinates.
    Matrix coordinates() const {
        VecBasis basis(dim_);
        const int n = basis.size();
        Matrix a = Matrix::Zero(n, n);
        for (const auto& wt : terms_) {
            if (const auto* d = std::get_if<Dense>(&wt.term)) {
                a += wt.coeff * d->coords;
                continue;
            }
            if (const auto* r = std::get_if<RankOne>(&wt.term)) {
                a += wt.coeff * basis.vec(r->direction) * basis.vec(r->functional).transpose();
                continue;
            }
            for (int k = 0; k < n; ++k) {
                SymMatrix e = basis.element(k);
                a.col(k) += wt.coeff * basis.vec(SymMatrix::from_matrix(apply_term(wt.term, e.matrix(), false)));
            }
        }
        return a;
    }

    /// Operator norm induced by the Frobenius norm.
    double norm() const {
        if (terms_.empty()) return 0.0;
        Eigen::JacobiSVD<Matrix> svd(coordinates());
        return svd.singularValues()(0);
    }

private:
    static void check_square(const Matrix& m, const char* what) {
        if (m.rows() != m.cols() || m.rows() == 0)
            throw InputError(std::string(what) + ": matrix must be square and non-empty");
    }

    static Matrix apply_term(const Term& t, const Matrix& x, bool adjoint) {
        return std::visit(
            [&](const auto& term) -> Matrix {
                using T = std::decay_t<decltype(term)>;
                if constexpr (std::is_same_v<T, Lyapunov>) {
                    if (adjoint) return term.beta.transpose() * x + x * term.beta;
                    return term.beta * x + x * term.beta.transpose();
                } else if constexpr (std::is_same_v<T, Conjugation>) {
                    if (adjoint) return term.g.transpose() * x * term.g;
                    return term.g * x * term.g.transpose();
                } else if constexpr (std::is_same_v<T, RankOne>) {
                    const SymMatrix& in = adjoint ? term.direction : term.functional;
                    const SymMatrix& out = adjoint ? term.functional : term.direction;
                    return in.matrix().cwiseProduct(x).sum() * out.matrix();
                } else {
                    VecBasis basis(static_cast<int>(x.rows()));
                    const Matrix& a = term.coords;
                    Vector y = adjoint ? Vector(a.transpose() * basis.vec(SymMatrix::from_matrix(x)))
                                       : Vector(a * basis.vec(SymMatrix::from_matrix(x)));
                    return basis.unvec(y).matrix();
                }
            },
            t);
    }

    SymMatrix evaluate(const SymMatrix& x, bool adjoint) const {
        if (x.dim() != dim_) throw InputError("SuperOperator: dimension mismatch");
        Matrix acc = Matrix::Zero(dim_, dim_);
        for (const auto& wt : terms_) acc += wt.coeff * apply_term(wt.term, x.matrix(), adjoint);
        return SymMatrix::from_matrix(acc);
    }

    int dim_ = 0;
    std::vector<WeightedTerm> terms_;
};

/// Dense matrix exponential (Padé scaling-and-squaring); throws on overflow.
inline Matrix expm(const Matrix& a) {
    Matrix e = a.exp();
    if (!e.allFinite()) throw NumericalError("matrix exponential overflowed (operator too large for t)");
    return e;
}

/// Semigroup t ↦ e^{tL} of a SuperOperator, acting in VecBasis coordinates.
class Propagator {
public:
    explicit Propagator(const SuperOperator& op)
        : basis_(op.dim()), coords_(op.coordinates()) {}

    const Matrix& coordinates() const { return coords_; }
    const VecBasis& basis() const { return basis_; }

    Matrix exp_coords(double t) const {
        if (!(t >= 0)) throw InputError("Propagator: t must be nonnegative");
        return expm(t * coords_);
    }

    SymMatrix apply(double t, const SymMatrix& v) const {
        return basis_.unvec(exp_coords(t) * basis_.vec(v));
    }

private:
    VecBasis basis_;
    Matrix coords_;
};

/// e^{tL} v.
inline SymMatrix expm_action(const SuperOperator& op, double t, const SymMatrix& v) {
    return Propagator(op).apply(t, v);
}

} // namespace affinehs
