#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "fft.hpp"

namespace marktop {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Toeplitz-like matrix A given by a generator of its displacement
/// S(A) = Z_1 A - A Z_{-1} = G B^T.
struct TLMatrix {
    Index n = 0;
    MatrixXd G;
    MatrixXd B;

    Index tau() const { return G.cols(); }
};

/// First column t_0..t_{n-1} and first row t_0, t_{-1}..t_{-n+1}.
struct ToeplitzInput {
    VectorXd col;
    VectorXd row;

    static ToeplitzInput symmetric(const VectorXd& c) { return {c, c}; }
};

namespace detail {

inline std::atomic<long>& densify_counter()
{
    static std::atomic<long> c{0};
    return c;
}

}  // namespace detail

/// Number of dense n-by-n reconstructions performed so far.
inline long densify_count() { return detail::densify_counter().load(); }

inline TLMatrix tl_zero(Index n)
{
    return {n, MatrixXd(n, 0), MatrixXd(n, 0)};
}

/// S(I) = 2 e_0 e_{n-1}^T.
inline TLMatrix tl_identity(Index n)
{
    if (n < 1)
        throw DimensionError("dimension must be positive");
    TLMatrix X{n, MatrixXd::Zero(n, 1), MatrixXd::Zero(n, 1)};
    X.G(0, 0) = 2.0;
    X.B(n - 1, 0) = 1.0;
    return X;
}

inline MatrixXd toeplitz_dense(const ToeplitzInput& t)
{
    const Index n = t.col.size();
    MatrixXd T(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            T(i, j) = i >= j ? t.col[i - j] : t.row[j - i];
    return T;
}

/// Z_1 A - A Z_{-1}, computed entrywise.
inline MatrixXd displacement(const MatrixXd& A)
{
    const Index n = A.rows();
    MatrixXd S(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            double z1a = i == 0 ? A(n - 1, j) : A(i - 1, j);
            double az = j == n - 1 ? -A(i, 0) : A(i, j + 1);
            S(i, j) = z1a - az;
        }
    return S;
}

/// Smallest generator with the same displacement: QR of both panels, SVD of the core.
/// Singular values below 1e-14 max(sigma_1, |R_G| |R_B|) are dropped.
inline TLMatrix compress(const TLMatrix& X)
{
    const Index n = X.n, r = X.tau();
    if (r == 0)
        return tl_zero(n);
    const Index p = std::min(n, r);
    Eigen::HouseholderQR<MatrixXd> qg(X.G), qb(X.B);
    MatrixXd Qg = qg.householderQ() * MatrixXd::Identity(n, p);
    MatrixXd Qb = qb.householderQ() * MatrixXd::Identity(n, p);
    MatrixXd Rg = qg.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    MatrixXd Rb = qb.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    MatrixXd core = Rg * Rb.transpose();
    Eigen::JacobiSVD<MatrixXd> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    double scale = std::max(s.size() ? s[0] : 0.0, Rg.norm() * Rb.norm());
    double thr = 1e-14 * scale;
    Index k = 0;
    while (k < s.size() && s[k] > thr)
        ++k;
    TLMatrix Y{n, MatrixXd(n, k), MatrixXd(n, k)};
    if (k > 0) {
        VectorXd sq = s.head(k).cwiseSqrt();
        Y.G = Qg * svd.matrixU().leftCols(k) * sq.asDiagonal();
        Y.B = Qb * svd.matrixV().leftCols(k) * sq.asDiagonal();
    }
    return Y;
}

/// S(T) = e_0 r^T + c e_{n-1}^T for a Toeplitz matrix T.
inline TLMatrix from_toeplitz(const ToeplitzInput& t)
{
    const Index n = t.col.size();
    if (n < 1 || t.row.size() != n)
        throw DimensionError("Toeplitz column and row must have the same positive length");
    auto tk = [&](Index k) { return k >= 0 ? t.col[k] : t.row[-k]; };
    VectorXd r(n), c = VectorXd::Zero(n);
    for (Index j = 0; j + 1 < n; ++j)
        r[j] = tk(n - 1 - j) - tk(-(j + 1));
    r[n - 1] = 2.0 * t.col[0];
    for (Index i = 1; i < n; ++i)
        c[i] = tk(i - n) + tk(i);
    TLMatrix X{n, MatrixXd::Zero(n, 2), MatrixXd::Zero(n, 2)};
    X.G(0, 0) = 1.0;
    X.B.col(0) = r;
    X.G.col(1) = c;
    X.B(n - 1, 1) = 1.0;
    return compress(X);
}

/// Matrix-vector products through A = 1/2 sum_j Z_1(g_j) Z_{-1}(J b_j), where Z_f(v) is the
/// f-circulant with first column v. Each product costs O(tau n log n).
class FastMatvec {
public:
    explicit FastMatvec(const TLMatrix& X) : n_(X.n), tau_(X.tau())
    {
        d_.resize(n_);
        for (Index k = 0; k < n_; ++k)
            d_[k] = std::polar(1.0, std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_));
        gh_.resize(tau_);
        bh_.resize(tau_);
        for (Index j = 0; j < tau_; ++j) {
            gh_[j] = X.G.col(j).cast<std::complex<double>>();
            fft::forward(gh_[j]);
            VectorXcd v(n_);
            for (Index k = 0; k < n_; ++k)
                v[k] = d_[k] * X.B(n_ - 1 - k, j);
            fft::forward(v);
            bh_[j] = std::move(v);
        }
    }

    Index size() const { return n_; }

    VectorXd apply(const VectorXd& x) const
    {
        if (x.size() != n_)
            throw DimensionError("matvec size mismatch");
        if (tau_ == 0)
            return VectorXd::Zero(n_);
        VectorXcd xh = d_.cwiseProduct(x.cast<std::complex<double>>());
        fft::forward(xh);
        VectorXcd acc = VectorXcd::Zero(n_);
        for (Index j = 0; j < tau_; ++j) {
            VectorXcd t = bh_[j].cwiseProduct(xh);
            fft::inverse(t);
            t = d_.conjugate().cwiseProduct(t);
            fft::forward(t);
            acc += gh_[j].cwiseProduct(t);
        }
        fft::inverse(acc);
        return 0.5 * acc.real();
    }

    VectorXd apply_transpose(const VectorXd& x) const
    {
        if (x.size() != n_)
            throw DimensionError("matvec size mismatch");
        if (tau_ == 0)
            return VectorXd::Zero(n_);
        VectorXcd xh = x.cast<std::complex<double>>();
        fft::forward(xh);
        VectorXcd acc = VectorXcd::Zero(n_);
        for (Index j = 0; j < tau_; ++j) {
            VectorXcd t = gh_[j].conjugate().cwiseProduct(xh);
            fft::inverse(t);
            t = d_.cwiseProduct(t);
            fft::forward(t);
            acc += bh_[j].conjugate().cwiseProduct(t);
        }
        fft::inverse(acc);
        return 0.5 * d_.conjugate().cwiseProduct(acc).real();
    }

    MatrixXd apply(const MatrixXd& X) const
    {
        MatrixXd Y(n_, X.cols());
        for (Index j = 0; j < X.cols(); ++j)
            Y.col(j) = apply(VectorXd(X.col(j)));
        return Y;
    }

    MatrixXd apply_transpose(const MatrixXd& X) const
    {
        MatrixXd Y(n_, X.cols());
        for (Index j = 0; j < X.cols(); ++j)
            Y.col(j) = apply_transpose(VectorXd(X.col(j)));
        return Y;
    }

private:
    Index n_;
    Index tau_;
    VectorXcd d_;
    std::vector<VectorXcd> gh_, bh_;
};

inline VectorXd matvec(const TLMatrix& X, const VectorXd& v) { return FastMatvec(X).apply(v); }

/// Rows from A_i = (A_{i-1} - S_i) Z_{-1}^T, starting from the first row A^T e_0.
inline MatrixXd to_dense(const TLMatrix& X)
{
    ++detail::densify_counter();
    const Index n = X.n;
    MatrixXd A(n, n);
    VectorXd e0 = VectorXd::Zero(n);
    e0[0] = 1.0;
    A.row(0) = FastMatvec(X).apply_transpose(e0).transpose();
    Eigen::RowVectorXd x(n), y(n);
    for (Index i = 1; i < n; ++i) {
        x = A.row(i - 1);
        if (X.tau() > 0)
            x -= X.G.row(i) * X.B.transpose();
        y[0] = -x[n - 1];
        y.tail(n - 1) = x.head(n - 1);
        A.row(i) = y;
    }
    return A;
}

inline void check_same_size(const TLMatrix& X, const TLMatrix& Y)
{
    if (X.n != Y.n)
        throw DimensionError("dimension mismatch");
}

inline TLMatrix add(const TLMatrix& X, const TLMatrix& Y)
{
    check_same_size(X, Y);
    TLMatrix Z{X.n, MatrixXd(X.n, X.tau() + Y.tau()), MatrixXd(X.n, X.tau() + Y.tau())};
    Z.G << X.G, Y.G;
    Z.B << X.B, Y.B;
    return compress(Z);
}

inline TLMatrix scale(double s, const TLMatrix& X)
{
    if (s == 0.0)
        return tl_zero(X.n);
    return {X.n, s * X.G, X.B};
}

/// X - z I
inline TLMatrix shift(const TLMatrix& X, double z)
{
    if (z == 0.0)
        return X;
    TLMatrix I = tl_identity(X.n);
    return add(X, scale(-z, I));
}

/// S(XY) = S(X) Y + X S(Y) - 2 (X e_0)(Y^T e_{n-1})^T
inline TLMatrix multiply(const TLMatrix& X, const TLMatrix& Y)
{
    check_same_size(X, Y);
    const Index n = X.n;
    FastMatvec fx(X), fy(Y);
    VectorXd e0 = VectorXd::Zero(n), en = VectorXd::Zero(n);
    e0[0] = 1.0;
    en[n - 1] = 1.0;
    const Index r = X.tau() + Y.tau() + 1;
    TLMatrix Z{n, MatrixXd(n, r), MatrixXd(n, r)};
    Z.G << X.G, fx.apply(Y.G), -2.0 * fx.apply(e0);
    Z.B << fy.apply_transpose(X.B), Y.B, fy.apply_transpose(en);
    return compress(Z);
}

/// Linear solves with a Toeplitz-like matrix. Solvers factor once and then solve
/// with X or X^T for many right-hand sides.
class Factorization {
public:
    virtual ~Factorization() = default;
    virtual MatrixXd solve(const MatrixXd& rhs, bool transpose = false) const = 0;
};

class Solver {
public:
    virtual ~Solver() = default;
    virtual std::unique_ptr<Factorization> factor(const TLMatrix& X) const = 0;
    virtual std::string name() const = 0;
};

/// Reconstructs the dense matrix and uses partial-pivoting LU.
class DenseLUSolver : public Solver {
public:
    std::unique_ptr<Factorization> factor(const TLMatrix& X) const override
    {
        struct F : Factorization {
            Eigen::PartialPivLU<MatrixXd> lu;
            MatrixXd solve(const MatrixXd& rhs, bool transpose) const override
            {
                return transpose ? MatrixXd(lu.transpose().solve(rhs)) : MatrixXd(lu.solve(rhs));
            }
        };
        auto f = std::make_unique<F>();
        f->lu.compute(to_dense(X));
        double rc = f->lu.rcond();
        if (!(rc > 1e-15))
            throw SingularMatrix("matrix is numerically singular");
        return f;
    }
    std::string name() const override { return "dense-lu"; }
};

/// Matrix-free conjugate gradients with FFT products; symmetric positive definite input only.
class CGSolver : public Solver {
public:
    explicit CGSolver(double tol = 1e-13, int max_iter = 5000) : tol_(tol), max_iter_(max_iter) {}

    std::unique_ptr<Factorization> factor(const TLMatrix& X) const override
    {
        struct F : Factorization {
            FastMatvec op;
            double tol;
            int max_iter;
            F(const TLMatrix& X, double t, int m) : op(X), tol(t), max_iter(m) {}
            MatrixXd solve(const MatrixXd& rhs, bool) const override
            {
                MatrixXd sol(rhs.rows(), rhs.cols());
                for (Index j = 0; j < rhs.cols(); ++j)
                    sol.col(j) = cg(VectorXd(rhs.col(j)));
                return sol;
            }
            VectorXd cg(const VectorXd& b) const
            {
                const double bn = b.norm();
                VectorXd x = VectorXd::Zero(b.size());
                if (bn == 0.0)
                    return x;
                VectorXd r = b, p = r;
                double rr = r.squaredNorm();
                for (int it = 0; it < max_iter; ++it) {
                    VectorXd Ap = op.apply(p);
                    double pAp = p.dot(Ap);
                    if (!(pAp > 0.0))
                        throw SingularMatrix("matrix is not positive definite");
                    double a = rr / pAp;
                    x += a * p;
                    r -= a * Ap;
                    double rr2 = r.squaredNorm();
                    if (std::sqrt(rr2) <= tol * bn) {
                        // one explicit residual check against drift
                        VectorXd res = b - op.apply(x);
                        if (res.norm() <= 10.0 * tol * bn)
                            return x;
                        r = res;
                        rr2 = r.squaredNorm();
                        p = r;
                        rr = rr2;
                        continue;
                    }
                    p = r + (rr2 / rr) * p;
                    rr = rr2;
                }
                VectorXd res = b - op.apply(x);
                if (res.norm() > 1e-10 * bn)
                    throw NoConvergence("conjugate gradients did not converge");
                return x;
            }
        };
        return std::make_unique<F>(X, tol_, max_iter_);
    }
    std::string name() const override { return "cg"; }

private:
    double tol_;
    int max_iter_;
};

inline const Solver& default_solver()
{
    static const DenseLUSolver s;
    return s;
}

inline MatrixXd solve(const TLMatrix& X, const MatrixXd& rhs, const Solver& solver = default_solver())
{
    if (rhs.rows() != X.n)
        throw DimensionError("right-hand side size mismatch");
    return solver.factor(X)->solve(rhs, false);
}

/// S(X^T) = Z_1 D^T Z_{-1} with D = S(X) - 2 e_0 (X^T e_{n-1})^T - 2 (X e_0) e_{n-1}^T.
inline TLMatrix transpose(const TLMatrix& X)
{
    const Index n = X.n, t = X.tau();
    if (t == 0)
        return tl_zero(n);
    FastMatvec op(X);
    VectorXd last_row = op.apply_transpose(VectorXd(VectorXd::Unit(n, n - 1)));
    VectorXd first_col = op.apply(VectorXd(VectorXd::Unit(n, 0)));
    MatrixXd P(n, t + 2), Q(n, t + 2);
    P << X.B, -2.0 * last_row, -2.0 * VectorXd::Unit(n, n - 1);
    Q << X.G, VectorXd::Unit(n, 0), first_col;
    TLMatrix Y{n, MatrixXd(n, t + 2), MatrixXd(n, t + 2)};
    // Z_1 P: cyclic down shift; Z_{-1}^T Q: up shift with sign flip into the last row
    Y.G.topRows(1) = P.bottomRows(1);
    Y.G.bottomRows(n - 1) = P.topRows(n - 1);
    Y.B.topRows(n - 1) = Q.bottomRows(n - 1);
    Y.B.bottomRows(1) = -Q.topRows(1);
    return compress(Y);
}

/// X^{-1} as the transpose of X^{-T}, whose generator is
/// S(X^{-T}) = -(Z_1 X^{-T} B)(Z_{-1}^T X^{-1} G)^T.
inline TLMatrix invert(const TLMatrix& X, const Solver& solver = default_solver())
{
    const Index n = X.n;
    if (X.tau() == 0)
        throw SingularMatrix("zero matrix");
    auto fac = solver.factor(X);
    MatrixXd u = fac->solve(X.B, true);
    MatrixXd v = fac->solve(X.G, false);
    TLMatrix Y{n, MatrixXd(n, X.tau()), MatrixXd(n, X.tau())};
    // Z_1 u: cyclic down shift; Z_{-1}^T v: up shift with sign flip into the last row
    Y.G.topRows(1) = -u.bottomRows(1);
    Y.G.bottomRows(n - 1) = -u.topRows(n - 1);
    Y.B.topRows(n - 1) = v.bottomRows(n - 1);
    Y.B.bottomRows(1) = -v.topRows(1);
    if (!Y.G.allFinite() || !Y.B.allFinite())
        throw SingularMatrix("non-finite inverse generator");
    return transpose(compress(Y));
}

/// Spectral norm estimate by power iteration on X^T X.
inline double norm_est(const TLMatrix& X)
{
    if (X.tau() == 0)
        return 0.0;
    FastMatvec op(X);
    const Index n = X.n;
    VectorXd v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < 2000; ++it) {
        VectorXd w = op.apply_transpose(op.apply(v));
        double nw = w.norm();
        if (nw == 0.0)
            return 0.0;
        double e = std::sqrt(std::max(v.dot(w), 0.0));
        v = w / nw;
        bool done = it >= 29 && std::abs(e - est) <= 1e-7 * e;
        est = e;
        if (done)
            break;
    }
    return est;
}

inline void write_toeplitz(std::ostream& os, const ToeplitzInput& t)
{
    const Index n = t.col.size();
    auto old = os.precision(17);
    os << n << '\n';
    for (Index i = 0; i < n; ++i)
        os << t.col[i] << '\n';
    for (Index i = 1; i < n; ++i)
        os << t.row[i] << '\n';
    os.precision(old);
}

inline ToeplitzInput read_toeplitz(std::istream& is)
{
    long n = 0;
    if (!(is >> n) || n < 1)
        throw DimensionError("bad Toeplitz header");
    ToeplitzInput t{VectorXd(n), VectorXd(n)};
    for (long i = 0; i < n; ++i)
        if (!(is >> t.col[i]))
            throw DimensionError("truncated Toeplitz column");
    t.row[0] = t.col[0];
    for (long i = 1; i < n; ++i)
        if (!(is >> t.row[i]))
            throw DimensionError("truncated Toeplitz row");
    return t;
}

}  // namespace marktop
