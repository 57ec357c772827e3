#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "approx.hpp"
#include "errors.hpp"
#include "markov.hpp"

namespace marktop {

inline constexpr double tiny = 1e-300;
inline constexpr double tol_interp = 1e-10;

/// r(z) = sum_j a_j / (z - x_j)
struct PartialFraction {
    std::vector<double> poles;
    std::vector<double> residuals;
    bool poles_in_interval = true;
    bool residuals_positive = true;
    double cauchy_cond = 1.0;  // condition number of the least-squares Cauchy system
};

enum class BaryKind { MM, Mm1M };  // [m|m] and [m-1|m]

/// r(z) = sum alpha_j/(z - t_j) / sum beta_j/(z - t_j), alpha_j = f(t_j) beta_j
struct Barycentric {
    std::vector<double> support;
    std::vector<double> weights;
    std::vector<double> values;
    BaryKind kind = BaryKind::Mm1M;
};

/// Thiele continued fraction f_1 + (z - z_1)/(f_2 + (z - z_2)/(... + (z - z_{M-1})/f_M)).
struct ThieleCF {
    std::vector<double> nodes;   // after pivoting
    std::vector<double> params;  // f_j^(j)
    bool reciprocal = false;     // the fraction interpolates 1/f
    bool positive = false;
};

enum class Rep { PFD, Bary, Thiele };

inline const char* rep_name(Rep r)
{
    switch (r) {
    case Rep::PFD:
        return "pfd";
    case Rep::Bary:
        return "bary";
    case Rep::Thiele:
        return "thiele";
    }
    return "?";
}

struct RationalInterpolant {
    std::variant<PartialFraction, Barycentric, ThieleCF> form;
    NodeSet nodes;

    Rep rep() const { return static_cast<Rep>(form.index()); }
};

namespace detail {

inline void check_samples(const std::vector<double>& z, const std::vector<double>& f)
{
    if (z.size() != f.size())
        throw DimensionError("node and value counts differ");
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!std::isfinite(z[i]) || !std::isfinite(f[i]))
            throw DomainError("non-finite sample");
        for (std::size_t j = 0; j < i; ++j)
            if (z[i] == z[j])
                throw DomainError("interpolation nodes must be distinct");
    }
}

}  // namespace detail

/// Poles from the Loewner pencil (Ls, L), residuals from least squares on all 2m nodes.
/// Rows of the Loewner matrices use the even nodes z_2, z_4, ..., columns the odd ones.
inline PartialFraction loewner_pfd(const std::vector<double>& z, const std::vector<double>& f,
                                   int m, double alpha = -inf, double beta = 0.0)
{
    detail::check_samples(z, f);
    if (m < 1 || m > 64 || z.size() != static_cast<std::size_t>(2 * m))
        throw DimensionError("loewner_pfd needs 2m samples with 1 <= m <= 64");
    Eigen::MatrixXd L(m, m), Ls(m, m);
    for (int j = 0; j < m; ++j) {
        double v = z[2 * j + 1], fv = f[2 * j + 1];
        for (int k = 0; k < m; ++k) {
            double w = z[2 * k], fw = f[2 * k];
            L(j, k) = (fv - fw) / (v - w);
            Ls(j, k) = (v * fv - w * fw) / (v - w);
        }
    }
    if (!Ls.allFinite() || !L.allFinite())
        throw PencilError("non-finite Loewner entries");
    Eigen::RealQZ<Eigen::MatrixXd> qz(Ls, L, false);
    if (qz.info() != Eigen::Success)
        throw PencilError("QZ iteration failed");
    const Eigen::MatrixXd& S = qz.matrixS();
    const Eigen::MatrixXd& T = qz.matrixT();
    double scale = std::max(S.cwiseAbs().maxCoeff(), T.cwiseAbs().maxCoeff());
    auto check_beta = [&](double b) {
        if (!(std::abs(b) > 1e-14 * scale))
            throw PencilError("Loewner matrix is numerically singular");
    };
    std::vector<std::complex<double>> eig;
    for (int i = 0; i < m;) {
        if (i + 1 < m && S(i + 1, i) != 0.0) {
            // 2x2 block: det(S_b - x T_b) = 0 with T_b upper triangular
            check_beta(T(i, i));
            check_beta(T(i + 1, i + 1));
            double a = T(i, i) * T(i + 1, i + 1);
            double b = -(S(i, i) * T(i + 1, i + 1) + S(i + 1, i + 1) * T(i, i) - S(i + 1, i) * T(i, i + 1));
            double c = S(i, i) * S(i + 1, i + 1) - S(i, i + 1) * S(i + 1, i);
            std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * a * c));
            eig.push_back((-b + disc) / (2.0 * a));
            eig.push_back((-b - disc) / (2.0 * a));
            i += 2;
        } else {
            check_beta(T(i, i));
            eig.push_back(S(i, i) / T(i, i));
            ++i;
        }
    }
    double emax = 0.0;
    for (auto e : eig)
        emax = std::max(emax, std::abs(e));
    PartialFraction pf;
    for (auto e : eig) {
        if (std::abs(e.imag()) > 1e-8 * emax)
            throw PoleLocationError("complex pole pair in the interpolant");
        pf.poles.push_back(e.real());
    }
    std::sort(pf.poles.begin(), pf.poles.end());
    double tol_pole = 1e-8 * (std::isinf(alpha) ? std::abs(beta) + 1.0 : beta - alpha);
    for (double x : pf.poles)
        if (x < alpha - tol_pole || x > beta + tol_pole)
            pf.poles_in_interval = false;

    const int M = 2 * m;
    Eigen::MatrixXd C(M, m);
    Eigen::VectorXd rhs(M);
    for (int i = 0; i < M; ++i) {
        rhs[i] = f[i];
        for (int k = 0; k < m; ++k) {
            double den = z[i] - pf.poles[k];
            if (std::abs(den) < tiny)
                throw PoleHit("pole coincides with a node");
            C(i, k) = 1.0 / den;
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C);
    Eigen::VectorXd a = qr.solve(rhs);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    const auto& sv = svd.singularValues();
    pf.cauchy_cond = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : inf;
    pf.residuals.assign(a.data(), a.data() + m);
    for (double r : pf.residuals)
        if (!(r > 0.0))
            pf.residuals_positive = false;
    return pf;
}

/// Barycentric interpolant. [m|m]: 2m+1 samples, supports z_1, z_3, ..., z_{2m+1}.
/// [m-1|m]: 2m samples, supports z_1, z_2, z_4, ..., z_2m plus the degree condition sum f(t_j) beta_j = 0.
inline Barycentric barycentric_fit(const std::vector<double>& z, const std::vector<double>& f, int m,
                                   BaryKind kind)
{
    detail::check_samples(z, f);
    if (m < 1)
        throw DimensionError("m must be positive");
    Barycentric b;
    b.kind = kind;
    std::vector<double> tz, tf;  // test nodes
    if (kind == BaryKind::MM) {
        if (z.size() != static_cast<std::size_t>(2 * m + 1))
            throw DimensionError("[m|m] fit needs 2m+1 samples");
        for (int j = 0; j <= m; ++j) {
            b.support.push_back(z[2 * j]);
            b.values.push_back(f[2 * j]);
        }
        for (int k = 1; k <= m; ++k) {
            tz.push_back(z[2 * k - 1]);
            tf.push_back(f[2 * k - 1]);
        }
    } else {
        if (z.size() != static_cast<std::size_t>(2 * m))
            throw DimensionError("[m-1|m] fit needs 2m samples");
        b.support.push_back(z[0]);
        b.values.push_back(f[0]);
        for (int j = 1; j <= m; ++j) {
            b.support.push_back(z[2 * j - 1]);
            b.values.push_back(f[2 * j - 1]);
        }
        for (int k = 2; k <= m; ++k) {
            tz.push_back(z[2 * k - 2]);
            tf.push_back(f[2 * k - 2]);
        }
    }
    const int cols = m + 1;
    const int rows = m;
    Eigen::MatrixXd A(rows, cols);
    for (std::size_t i = 0; i < tz.size(); ++i)
        for (int j = 0; j < cols; ++j)
            A(i, j) = (tf[i] - b.values[j]) / (tz[i] - b.support[j]);
    if (kind == BaryKind::Mm1M)
        for (int j = 0; j < cols; ++j)
            A(rows - 1, j) = b.values[j];

    if (kind == BaryKind::MM && A.cwiseAbs().maxCoeff() == 0.0) {
        // constant data: any pole-free weights reproduce it
        for (int j = 0; j < cols; ++j)
            b.weights.push_back(j % 2 ? -1.0 : 1.0);
        return b;
    }
    for (int i = 0; i < rows; ++i) {
        double nr = A.row(i).norm();
        if (nr > 0)
            A.row(i) /= nr;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv[rows - 1] > 1e-12 * sv[0]))
        throw RankDeficiency("weight vector is not unique");
    Eigen::VectorXd w = svd.matrixV().col(cols - 1);
    b.weights.assign(w.data(), w.data() + cols);
    return b;
}

/// Reciprocal-difference table with pivoting. row[j][k] holds f_k^(j+1) for k >= j
/// (0-based, in the pivoted node order of that stage).
struct ThieleTable {
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<double>> nodes;
};

inline ThieleCF thiele_fit(const std::vector<double>& z, const std::vector<double>& f, bool reciprocal,
                           ThieleTable* table = nullptr)
{
    if (z.size() != f.size() || z.empty())
        throw DimensionError("thiele_fit needs matching nonempty samples");
    const std::size_t M = z.size();
    std::vector<double> zz = z, v(M);
    for (std::size_t k = 0; k < M; ++k) {
        if (reciprocal && f[k] == 0.0)
            throw DomainError("reciprocal fit of a zero value");
        v[k] = reciprocal ? 1.0 / f[k] : f[k];
    }
    ThieleCF cf;
    cf.reciprocal = reciprocal;
    for (std::size_t j = 0; j < M; ++j) {
        std::size_t piv = j;
        for (std::size_t k = j + 1; k < M; ++k)
            if (std::abs(v[k]) < std::abs(v[piv]))
                piv = k;
        std::swap(v[j], v[piv]);
        std::swap(zz[j], zz[piv]);
        if (table) {
            table->rows.emplace_back(v.begin() + j, v.end());
            table->nodes.emplace_back(zz.begin() + j, zz.end());
        }
        cf.params.push_back(v[j]);
        cf.nodes.push_back(zz[j]);
        for (std::size_t k = j + 1; k < M; ++k) {
            double diff = v[k] - v[j];
            if (std::abs(diff) < tiny)
                throw Breakdown("vanishing reciprocal difference");
            v[k] = (zz[k] - zz[j]) / diff;
        }
    }
    cf.positive = std::all_of(cf.params.begin(), cf.params.end(), [](double p) { return p > 0.0; });
    return cf;
}

inline double eval_pfd(const PartialFraction& p, double z)
{
    double s = 0.0;
    for (std::size_t j = 0; j < p.poles.size(); ++j) {
        double den = z - p.poles[j];
        if (std::abs(den) < tiny)
            throw PoleHit("evaluation at a pole");
        s += p.residuals[j] / den;
    }
    return s;
}

inline double eval_bary(const Barycentric& b, double z)
{
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < b.support.size(); ++j) {
        double d = z - b.support[j];
        if (d == 0.0)
            return b.values[j];
        num += b.values[j] * b.weights[j] / d;
        den += b.weights[j] / d;
    }
    if (std::abs(den) < tiny)
        throw PoleHit("evaluation at a pole of the barycentric form");
    return num / den;
}

/// Backward evaluation of the continued fraction (the reciprocal is taken when the fit was).
template <typename T = double>
T eval_thiele(const ThieleCF& t, T z)
{
    const std::size_t M = t.params.size();
    T R = t.params[M - 1];
    for (std::size_t j = M - 1; j-- > 0;) {
        if (std::abs(static_cast<double>(R)) < tiny)
            throw PoleHit("continued fraction breakdown at evaluation");
        R = static_cast<T>(t.params[j]) + (z - static_cast<T>(t.nodes[j])) / R;
    }
    if (t.reciprocal) {
        if (std::abs(static_cast<double>(R)) < tiny)
            throw PoleHit("evaluation at a pole");
        return T(1) / R;
    }
    return R;
}

inline double eval_interpolant(const RationalInterpolant& r, double z)
{
    return std::visit(
        [z](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PartialFraction>)
                return eval_pfd(f, z);
            else if constexpr (std::is_same_v<F, Barycentric>)
                return eval_bary(f, z);
            else
                return eval_thiele(f, z);
        },
        r.form);
}

/// Type [m-1|m] interpolant of spec on the 2m nodes, in the requested representation.
inline RationalInterpolant fit_interpolant(Rep rep, const MarkovSpec& spec, const NodeSet& ns)
{
    std::vector<double> f;
    f.reserve(ns.nodes.size());
    for (double z : ns.nodes)
        f.push_back(eval_markov(spec, z));
    RationalInterpolant r;
    r.nodes = ns;
    switch (rep) {
    case Rep::PFD:
        r.form = loewner_pfd(ns.nodes, f, ns.m, spec.alpha, spec.beta);
        break;
    case Rep::Bary:
        r.form = barycentric_fit(ns.nodes, f, ns.m, BaryKind::Mm1M);
        break;
    case Rep::Thiele:
        r.form = thiele_fit(ns.nodes, f, true);
        break;
    }
    return r;
}

struct ScanResult {
    double max_rel_err = 0.0;
    double argmax = 0.0;
};

/// max over the grid of |1 - r(z)/f(z)|
inline ScanResult interp_error_scan(const MarkovSpec& spec, const RationalInterpolant& r,
                                    const std::vector<double>& grid)
{
    ScanResult s;
    for (double z : grid) {
        double e = std::abs(1.0 - eval_interpolant(r, z) / eval_markov(spec, z));
        if (!(e <= s.max_rel_err)) {
            s.max_rel_err = e;
            s.argmax = z;
        }
    }
    return s;
}

}  // namespace marktop
