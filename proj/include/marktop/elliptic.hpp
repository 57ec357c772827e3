#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace marktop {

/// Arithmetic-geometric mean of a, b > 0.
inline double agm(double a, double b)
{
    for (int it = 0; it < 64; ++it) {
        if (std::abs(a - b) <= 1e-15 * a)
            return 0.5 * (a + b);
        double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    throw EllipticConvergenceError("AGM did not converge");
}

/// Complete elliptic integral K for modulus k, given the complementary modulus kp = sqrt(1-k^2).
inline double ellipk_comp(double kp)
{
    if (!(kp > 0.0 && kp <= 1.0))
        throw EllipticConvergenceError("complementary modulus out of range");
    return std::numbers::pi / (2.0 * agm(1.0, kp));
}

/// Complete elliptic integral of the first kind, modulus convention.
inline double ellipk(double k)
{
    return ellipk_comp(std::sqrt((1.0 - k) * (1.0 + k)));
}

/// Jacobi sn(u, k), modulus convention, via the descending Landen (AGM) sequence.
inline double jacobi_sn(double u, double k)
{
    if (k == 0.0)
        return std::sin(u);
    std::vector<double> a{1.0}, c{k};
    double b = std::sqrt((1.0 - k) * (1.0 + k));
    for (int it = 0;; ++it) {
        if (it > 64)
            throw EllipticConvergenceError("Landen sequence did not converge");
        if (std::abs(c.back()) < 1e-14 && it >= 1)
            break;
        double an = 0.5 * (a.back() + b);
        double cn = 0.5 * (a.back() - b);
        b = std::sqrt(a.back() * b);
        a.push_back(an);
        c.push_back(cn);
    }
    std::size_t N = a.size() - 1;
    double phi = std::ldexp(1.0, static_cast<int>(N)) * a[N] * u;
    for (std::size_t n = N; n >= 1; --n)
        phi = 0.5 * (phi + std::asin(c[n] / a[n] * std::sin(phi)));
    return std::sin(phi);
}

}  // namespace marktop
