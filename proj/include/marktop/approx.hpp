#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "elliptic.hpp"
#include "errors.hpp"
#include "markov.hpp"

namespace marktop {

/// Moebius map sending p1 -> 0, p2 -> inf, p3 -> 1 on the extended real line.
/// Points are handled projectively, so +inf and -inf denote the same point.
class Moebius3 {
public:
    Moebius3() = default;
    Moebius3(double p1, double p2, double p3) : p_{hom(p1), hom(p2), hom(p3)} {}

    double operator()(double x) const
    {
        Hom h = hom(x);
        double a = det(p_[2], p_[1]);
        double b = det(p_[2], p_[0]);
        double num = det(h, p_[0]) * a;
        double den = det(h, p_[1]) * b;
        return value(num, den);
    }

    double inverse(double s) const
    {
        if (s == 1.0)
            return value(p_[2].n, p_[2].d);
        Hom h = hom(s);
        double a = det(p_[2], p_[1]);
        double b = det(p_[2], p_[0]);
        double xn = a * h.d * p_[0].n - b * h.n * p_[1].n;
        double xd = a * h.d * p_[0].d - b * h.n * p_[1].d;
        return value(xn, xd);
    }

private:
    struct Hom {
        double n, d;
    };
    static Hom hom(double x) { return std::isinf(x) ? Hom{1.0, 0.0} : Hom{x, 1.0}; }
    static double det(Hom x, Hom p) { return x.n * p.d - x.d * p.n; }
    static double value(double n, double d)
    {
        if (d == 0.0)
            return inf;
        return n / d;
    }
    Hom p_[3]{};
};

/// The condenser ([alpha,beta],[c,d]) with its Moebius map T and conformal map phi.
struct Geometry {
    double alpha = -inf, beta = 0.0, c = 1.0, d = 2.0;
    double cross = 2.0;  // (c-alpha)(d-beta)/((c-beta)(d-alpha)) = 1/k^2
    double k = 0.0, kappa = 0.0, lambda = 0.0, rho = 0.0;
    /// Extra Moebius rotation y -> (y+t)/(1+ty) of [-1,1]; zero for the normalized map.
    double twist = 0.0;
    Moebius3 sy, sz;

    double T(double y) const
    {
        if (twist != 0.0)
            y = std::isinf(y) ? 1.0 / twist : (y + twist) / (1.0 + twist * y);
        return sz.inverse(sy(y));
    }

    double T_inv(double z) const
    {
        double y = sy.inverse(sz(z));
        if (twist != 0.0)
            y = std::isinf(y) ? -1.0 / twist : (y - twist) / (1.0 - twist * y);
        return y;
    }

    bool in_support(double z) const { return z >= alpha && z <= beta; }

    /// u = 1/phi(z), |u| < 1.
    double to_u(double z) const
    {
        if (std::isnan(z) || in_support(z))
            throw DomainError("point lies on [alpha,beta]");
        double y = T_inv(z);
        if (std::isinf(y))
            return 0.0;
        if (std::abs(y) <= 1.0)
            throw DomainError("point lies on [alpha,beta]");
        double s = y > 0 ? 1.0 : -1.0;
        return 1.0 / (y + s * std::sqrt((y - 1.0) * (y + 1.0)));
    }

    double from_u(double u) const
    {
        if (u == 0.0)
            return T(inf);
        return T(0.5 * (u + 1.0 / u));
    }

    double phi(double z) const
    {
        double u = to_u(z);
        return u == 0.0 ? inf : 1.0 / u;
    }

    double phi_inv(double w) const
    {
        if (std::isinf(w))
            return T(inf);
        return T(0.5 * (w + 1.0 / w));
    }
};

inline double cross_ratio(double alpha, double beta, double c, double d)
{
    if (std::isinf(alpha))
        return (d - beta) / (c - beta);
    if (std::isinf(d))
        return (c - alpha) / (c - beta);
    return (c - alpha) * (d - beta) / ((c - beta) * (d - alpha));
}

inline Geometry build_geometry(double alpha, double beta, double c, double d, double twist = 0.0)
{
    if (std::isnan(alpha) || std::isnan(beta) || std::isnan(c) || std::isnan(d))
        throw InvalidInterval("NaN endpoint");
    if (c == d)
        throw DegenerateCondenser("empty condenser: c = d");
    if (!(alpha < beta && beta < c && c < d) || std::isinf(beta) || std::isinf(c) ||
        (std::isinf(alpha) && alpha > 0) || (std::isinf(d) && d < 0))
        throw InvalidInterval("need alpha < beta < c < d");
    if (std::isinf(alpha) && std::isinf(d))
        throw DegenerateCondenser("alpha = -inf and d = +inf touch at infinity");
    if (!(std::abs(twist) < 1.0))
        throw DomainError("twist must lie in (-1,1)");

    Geometry g;
    g.alpha = alpha;
    g.beta = beta;
    g.c = c;
    g.d = d;
    g.cross = cross_ratio(alpha, beta, c, d);
    double sx = std::sqrt(g.cross);
    g.kappa = (sx - 1.0) / (sx + 1.0);
    g.k = 1.0 / sx;
    double sk = std::sqrt(g.k);
    g.lambda = (1.0 - sk) / (1.0 + sk);
    double mu = g.lambda * g.lambda;
    g.rho = std::exp(-std::numbers::pi * ellipk_comp(mu) / (4.0 * ellipk(mu)));
    g.sy = Moebius3(-1.0, 1.0, 1.0 / g.kappa);
    g.sz = Moebius3(alpha, beta, c);
    g.twist = twist;
    return g;
}

/// Interpolation nodes z_1 < ... < z_2m of the degree-m interpolant.
struct NodeSet {
    int m = 0;
    std::vector<double> nodes;
};

/// Zeros of the minimal Blaschke product on [-lambda, lambda], mapped back to [c,d].
inline NodeSet optimal_nodes(const Geometry& g, int m)
{
    if (m < 1)
        throw DomainError("m must be positive");
    double mu = g.lambda * g.lambda;
    double K = ellipk(mu);
    NodeSet ns;
    ns.m = m;
    for (int j = 1; j <= 2 * m; ++j) {
        double u = g.lambda * jacobi_sn(K * (-1.0 + (2.0 * j - 1.0) / (2.0 * m)), mu);
        ns.nodes.push_back(g.from_u(u));
    }
    std::sort(ns.nodes.begin(), ns.nodes.end());
    return ns;
}

namespace detail {

/// Maximum of a smooth nonnegative function on [lo, hi]: Chebyshev grid plus golden-section polish.
inline double grid_maximum(const std::function<double(double)>& fn, double lo, double hi,
                           int npts = 2001)
{
    std::vector<double> x(npts), v(npts);
    for (int i = 0; i < npts; ++i) {
        x[i] = 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(std::numbers::pi * i / (npts - 1));
        v[i] = fn(x[i]);
    }
    int best = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    double vmax = v[best];
    double a = x[std::max(best - 1, 0)];
    double b = x[std::min(best + 1, npts - 1)];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = fn(c1), f2 = fn(c2);
    for (int it = 0; it < 80 && b - a > 1e-16 * (std::abs(a) + std::abs(b)); ++it) {
        if (f1 > f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = fn(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = fn(c2);
        }
    }
    return std::max({vmax, f1, f2});
}

}  // namespace detail

/// eta_2m = max over [c,d] of the Blaschke product |G_2m| built on the given nodes.
inline double blaschke_eta(const Geometry& g, const std::vector<double>& nodes)
{
    std::vector<double> un;
    un.reserve(nodes.size());
    for (double z : nodes)
        un.push_back(g.to_u(z));
    double uc = g.to_u(g.c), ud = g.to_u(g.d);
    double lo = std::min(uc, ud), hi = std::max(uc, ud);
    auto G = [&](double u) {
        double p = 1.0;
        for (double uj : un)
            p *= (u - uj) / (1.0 - u * uj);
        return std::abs(p);
    };
    return detail::grid_maximum(G, lo, hi);
}

inline double blaschke_eta(const Geometry& g, const NodeSet& ns) { return blaschke_eta(g, ns.nodes); }

/// 8 rho^2m / (1 - 2 rho^2m)^2, valid while 2 rho^2m < 1.
inline double apriori_bound(const Geometry& g, int m)
{
    double q = std::pow(g.rho, 2.0 * m);
    if (!(2.0 * q < 1.0))
        throw BoundInvalid("2 rho^2m >= 1: no certificate at this degree");
    return 8.0 * q / ((1.0 - 2.0 * q) * (1.0 - 2.0 * q));
}

/// Residual level above which degree m is rejected: five times the a priori bound.
/// Infinite when the a priori bound is not available.
inline double stopping_threshold(const Geometry& g, int m)
{
    double q = std::pow(g.rho, 2.0 * m);
    if (!(2.0 * q < 1.0))
        return inf;
    return 40.0 * q / ((1.0 - 2.0 * q) * (1.0 - 2.0 * q));
}

inline double relative_error_bound(double eta, bool positive_case)
{
    if (!(eta < 1.0) || eta < 0.0)
        throw BoundInvalid("eta must lie in [0,1)");
    if (positive_case)
        return 4.0 * eta;
    return 4.0 * eta / ((1.0 - eta) * (1.0 - eta));
}

inline double relative_error_bound(const Geometry& g, const NodeSet& ns, bool positive_case = false)
{
    return relative_error_bound(blaschke_eta(g, ns), positive_case);
}

/// Bound on the unit disk for supp(mu) in [alpha, beta], beta < -1:
/// C max_{z in [alpha,beta]} |prod (1 - z z_j)/(z - z_j)|, C = (1-beta)/(-1-beta) f(-1).
inline double disk_error_bound(const MarkovSpec& spec, const std::vector<std::complex<double>>& nodes)
{
    double beta = spec.beta, alpha = spec.alpha;
    if (!(beta < -1.0))
        throw DomainError("disk bound needs beta < -1");
    double C = (1.0 - beta) / (-1.0 - beta) * eval_markov(spec, -1.0);
    if (nodes.empty())
        return C;
    // s = 1/z maps [alpha, beta] onto [1/beta, 1/alpha]
    double lo = 1.0 / beta;
    double hi = std::isinf(alpha) ? 0.0 : 1.0 / alpha;
    auto F = [&](double s) {
        std::complex<double> p = 1.0;
        for (const auto& zj : nodes)
            p *= (s - zj) / (1.0 - s * zj);
        return std::abs(p);
    };
    return C * detail::grid_maximum(F, lo, hi);
}

/// n cosine points on [c,d], endpoints included.
inline std::vector<double> cosine_points(double c, double d, int n)
{
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i)
        x[i] = n == 1 ? 0.5 * (c + d)
                      : c + 0.5 * (d - c) * (1.0 - std::cos(std::numbers::pi * i / (n - 1)));
    return x;
}

}  // namespace marktop
