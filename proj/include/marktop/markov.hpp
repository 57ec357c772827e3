#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace marktop {

inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class Kind { InvSqrt, LogOverZm1, Power, WorstCase, Custom };

/// A Markov function f(z) = int dmu(x)/(z-x) with supp(mu) in [alpha, beta].
struct MarkovSpec {
    Kind kind = Kind::InvSqrt;
    double alpha = -inf;
    double beta = 0.0;
    double gamma = -0.5;  // exponent for Kind::Power
    std::function<double(double)> custom;
    /// Optional analytic continuation, used for Taylor coefficients of Custom specs.
    std::function<std::complex<double>(std::complex<double>)> custom_complex;
    std::string name;
};

inline MarkovSpec inv_sqrt_spec()
{
    MarkovSpec s;
    s.kind = Kind::InvSqrt;
    s.name = "invsqrt";
    return s;
}

inline MarkovSpec log_spec()
{
    MarkovSpec s;
    s.kind = Kind::LogOverZm1;
    s.name = "log";
    return s;
}

inline MarkovSpec power_spec(double gamma)
{
    if (!(gamma >= -1.0 && gamma < 0.0))
        throw DomainError("power exponent must lie in [-1,0)");
    MarkovSpec s;
    s.kind = Kind::Power;
    s.gamma = gamma;
    s.name = "power";
    return s;
}

/// f(z) = sqrt|alpha| / sqrt((z-alpha)(z-beta)), or 1/sqrt(z-beta) when alpha = -inf.
/// For alpha = 0 the factor sqrt|alpha| is replaced by 1.
inline MarkovSpec worst_case_spec(double alpha, double beta)
{
    if (std::isnan(alpha) || std::isnan(beta) || !(alpha < beta) || std::isinf(beta))
        throw InvalidInterval("worst-case measure needs alpha < beta");
    MarkovSpec s;
    s.kind = Kind::WorstCase;
    s.alpha = alpha;
    s.beta = beta;
    s.name = "worstcase";
    return s;
}

inline MarkovSpec custom_spec(double alpha, double beta, std::function<double(double)> f,
                              std::function<std::complex<double>(std::complex<double>)> fc = {})
{
    if (!(alpha < beta) || std::isinf(beta))
        throw InvalidInterval("custom spec needs alpha < beta");
    MarkovSpec s;
    s.kind = Kind::Custom;
    s.alpha = alpha;
    s.beta = beta;
    s.custom = std::move(f);
    s.custom_complex = std::move(fc);
    s.name = "custom";
    return s;
}

inline double worst_case_scale(double alpha)
{
    return (std::isinf(alpha) || alpha == 0.0) ? 1.0 : std::sqrt(std::abs(alpha));
}

inline double eval_markov(const MarkovSpec& s, double z)
{
    if (!(z > s.beta))
        throw DomainError("argument must exceed beta");
    switch (s.kind) {
    case Kind::InvSqrt:
        return 1.0 / std::sqrt(z);
    case Kind::LogOverZm1: {
        double t = z - 1.0;
        if (t == 0.0)
            return 1.0;
        return std::log1p(t) / t;
    }
    case Kind::Power:
        return std::pow(z, s.gamma);
    case Kind::WorstCase:
        if (std::isinf(s.alpha))
            return 1.0 / std::sqrt(z - s.beta);
        return worst_case_scale(s.alpha) / (std::sqrt(z - s.alpha) * std::sqrt(z - s.beta));
    case Kind::Custom:
        return s.custom(z);
    }
    return 0.0;
}

namespace detail {

/// Gauss-Legendre nodes and weights on [0,1].
inline void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = t;
                p0 = 1.0;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16)
                break;
        }
        double wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = 0.5 * (1.0 - t);
        x[n - 1 - i] = 0.5 * (1.0 + t);
        w[i] = w[n - 1 - i] = 0.5 * wt;
    }
}

/// Taylor coefficients of (z0 + h - a)^p, base b = z0 - a > 0.
inline std::vector<double> binomial_series(double b, double p, int count)
{
    std::vector<double> g(count);
    g[0] = std::pow(b, p);
    for (int j = 1; j < count; ++j)
        g[j] = g[j - 1] * (p - j + 1) / (j * b);
    return g;
}

inline std::vector<double> log_series(double z0, int count)
{
    std::vector<double> g(count);
    double t = z0 - 1.0;
    if (z0 >= 5.0) {
        // (t + h) F(h) = log(z0 + h)
        double prev = 0.0;
        double zp = 1.0;
        for (int j = 0; j < count; ++j) {
            double lj;
            if (j == 0) {
                lj = std::log(z0);
            } else {
                zp *= z0;
                lj = ((j % 2) ? 1.0 : -1.0) / (j * zp);
            }
            g[j] = (lj - prev) / t;
            prev = g[j];
        }
        return g;
    }
    // g_j = int_0^1 (-s)^j / (1 + s t)^(j+1) ds; pole of the integrand at s = -1/t
    int npts = 64;
    if (t < 0) {
        double dist = -1.0 / t - 1.0;  // distance of the pole beyond s = 1
        double r = 1.0 + 2.0 * dist;
        double rho = r + std::sqrt(r * r - 1.0);
        npts = std::clamp(static_cast<int>(std::ceil(45.0 / std::log(rho))), 64, 4000);
    }
    std::vector<double> x, w;
    gauss_legendre01(npts, x, w);
    for (int j = 0; j < count; ++j) {
        double acc = 0.0;
        for (int i = 0; i < npts; ++i) {
            double q = 1.0 + x[i] * t;
            acc += w[i] * std::pow(x[i] / q, j) / q;
        }
        g[j] = (j % 2) ? -acc : acc;
    }
    return g;
}

}  // namespace detail

/// Taylor coefficients g_0..g_{count-1} of f at z0 > beta.
inline std::vector<double> taylor_coefficients(const MarkovSpec& s, double z0, int count)
{
    if (!(z0 > s.beta))
        throw DomainError("expansion point must exceed beta");
    switch (s.kind) {
    case Kind::InvSqrt:
        return detail::binomial_series(z0, -0.5, count);
    case Kind::Power:
        return detail::binomial_series(z0, s.gamma, count);
    case Kind::LogOverZm1:
        return detail::log_series(z0, count);
    case Kind::WorstCase: {
        if (std::isinf(s.alpha))
            return detail::binomial_series(z0 - s.beta, -0.5, count);
        auto a = detail::binomial_series(z0 - s.alpha, -0.5, count);
        auto b = detail::binomial_series(z0 - s.beta, -0.5, count);
        double sc = worst_case_scale(s.alpha);
        std::vector<double> g(count, 0.0);
        for (int j = 0; j < count; ++j)
            for (int k = 0; k <= j; ++k)
                g[j] += a[k] * b[j - k];
        for (auto& v : g)
            v *= sc;
        return g;
    }
    case Kind::Custom: {
        double r = 0.5 * (z0 - s.beta);
        std::vector<double> g(count, 0.0);
        if (s.custom_complex) {
            // trapezoidal Cauchy integral on |h| = r
            const int n = 128;
            for (int k = 0; k < n; ++k) {
                double th = 2.0 * std::numbers::pi * k / n;
                std::complex<double> e = std::polar(1.0, th);
                std::complex<double> fv = s.custom_complex(z0 + r * e);
                for (int j = 0; j < count; ++j)
                    g[j] += std::real(fv * std::pow(std::conj(e), j));
            }
            for (int j = 0; j < count; ++j)
                g[j] /= n * std::pow(r, j);
            return g;
        }
        // Chebyshev interpolation on [z0-r, z0+r], converted to monomials in h/r
        const int n = 40;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        std::vector<double> fx(n);
        for (int k = 0; k < n; ++k)
            fx[k] = s.custom(z0 + r * std::cos(std::numbers::pi * (k + 0.5) / n));
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += fx[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
            c[j] = acc * (j == 0 ? 1.0 : 2.0) / n;
        }
        // monomial coefficients via T_{j+1} = 2x T_j - T_{j-1}
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
        T(0, 0) = 1.0;
        if (n > 1)
            T(1, 1) = 1.0;
        for (int j = 2; j < n; ++j) {
            for (int i = 1; i < n; ++i)
                T(j, i) = 2.0 * T(j - 1, i - 1);
            T.row(j) -= T.row(j - 2);
        }
        Eigen::VectorXd mono = T.transpose() * c;
        for (int j = 0; j < count; ++j)
            g[j] = (j < n ? mono[j] : 0.0) / std::pow(r, j);
        return g;
    }
    }
    return {};
}

/// Hankel matrix (g_{i+j+ell})_{i,j=0..n}.
inline Eigen::MatrixXd hankel_matrix(const MarkovSpec& s, double z0, int n, int ell)
{
    auto g = taylor_coefficients(s, z0, 2 * n + ell + 1);
    Eigen::MatrixXd H(n + 1, n + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            H(i, j) = g[i + j + ell];
    return H;
}

struct HankelReport {
    bool pass = true;
    /// Smallest eigenvalue of the scaled H_n^(0) relative to its spectral radius, n = 0..n_max.
    std::vector<double> min_eig_pos;
    /// Largest eigenvalue of the scaled H_n^(1) relative to its spectral radius.
    std::vector<double> max_eig_neg;
};

inline constexpr double hankel_tol_def = 1e-10;

/// H_n^(0) positive definite and H_n^(1) negative definite for n <= n_max.
/// Eigenvalues are taken after the symmetric diagonal scaling D H D with
/// D = diag(|H_ii|^(-1/2)); the congruence keeps the inertia.
inline HankelReport check_hankel_definiteness(const MarkovSpec& s, double z0, int n_max)
{
    HankelReport rep;
    auto g = taylor_coefficients(s, z0, 2 * n_max + 2);
    for (int ell = 0; ell <= 1; ++ell) {
        double sign = ell == 0 ? 1.0 : -1.0;
        for (int n = 0; n <= n_max; ++n) {
            Eigen::MatrixXd H(n + 1, n + 1);
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j)
                    H(i, j) = sign * g[i + j + ell];
            double ratio;
            if ((H.diagonal().array() <= 0.0).any() || !H.allFinite()) {
                ratio = -1.0;
            } else {
                Eigen::VectorXd d = H.diagonal().array().rsqrt();
                Eigen::MatrixXd S = d.asDiagonal() * H * d.asDiagonal();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
                const auto& ev = es.eigenvalues();
                double rad = ev.cwiseAbs().maxCoeff();
                ratio = ev.minCoeff() / rad;
            }
            if (!(ratio > hankel_tol_def))
                rep.pass = false;
            if (ell == 0)
                rep.min_eig_pos.push_back(ratio);
            else
                rep.max_eig_neg.push_back(-ratio);
        }
    }
    return rep;
}

}  // namespace marktop
