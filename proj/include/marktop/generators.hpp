#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "errors.hpp"
#include "tlalgebra.hpp"

namespace marktop {

inline std::pair<double, double> symmetric_extremes(const MatrixXd& A)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return {es.eigenvalues()[0], es.eigenvalues()[A.rows() - 1]};
}

/// Symmetric Toeplitz matrix with seeded uniform(-1,1) first row, mapped by a T + b I so that
/// its extreme eigenvalues become lmin and lmax.
inline ToeplitzInput gen_random_spd_toeplitz(Index n, double lmin, double lmax, std::uint64_t seed)
{
    if (n < 2)
        throw DimensionError("n must be at least 2");
    if (!(lmin > 0.0 && lmax > lmin))
        throw InvalidInterval("need 0 < lmin < lmax");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    VectorXd t(n);
    for (Index i = 0; i < n; ++i)
        t[i] = U(rng);
    auto [lo, hi] = symmetric_extremes(toeplitz_dense(ToeplitzInput::symmetric(t)));
    double a = (lmax - lmin) / (hi - lo);
    t *= a;
    t[0] += lmin - a * lo;
    return ToeplitzInput::symmetric(t);
}

/// Tridiagonal Toeplitz with 2 on the diagonal and -1 beside it.
inline ToeplitzInput laplacian1d(Index n)
{
    if (n < 1)
        throw DimensionError("n must be positive");
    VectorXd t = VectorXd::Zero(n);
    t[0] = 2.0;
    if (n > 1)
        t[1] = -1.0;
    return ToeplitzInput::symmetric(t);
}

inline std::pair<double, double> laplacian1d_extremes(Index n)
{
    double h = std::numbers::pi / static_cast<double>(n + 1);
    return {2.0 - 2.0 * std::cos(h), 2.0 + 2.0 * std::cos(h)};
}

/// Kac-Murdock-Szego matrix a^{|i-j|}, 0 < a < 1; its spectrum lies in [(1-a)/(1+a), (1+a)/(1-a)].
inline ToeplitzInput kms(Index n, double a)
{
    if (!(a > 0.0 && a < 1.0))
        throw DomainError("KMS parameter must lie in (0,1)");
    VectorXd t(n);
    for (Index i = 0; i < n; ++i)
        t[i] = std::pow(a, static_cast<double>(i));
    return ToeplitzInput::symmetric(t);
}

inline std::pair<double, double> kms_bounds(double a) { return {(1.0 - a) / (1.0 + a), (1.0 + a) / (1.0 - a)}; }

}  // namespace marktop
