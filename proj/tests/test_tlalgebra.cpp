#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <marktop/generators.hpp>
#include <marktop/tlalgebra.hpp>

using namespace marktop;

namespace {

ToeplitzInput random_toeplitz(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ToeplitzInput t{VectorXd(n), VectorXd(n)};
    for (Index i = 0; i < n; ++i) {
        t.col[i] = U(rng);
        t.row[i] = U(rng);
    }
    t.row[0] = t.col[0];
    return t;
}

double rel(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / b.norm(); }

void expect_displacement_identity(const TLMatrix& X, double tol = 1e-13)
{
    MatrixXd D = to_dense(X);
    MatrixXd GB = X.tau() ? MatrixXd(X.G * X.B.transpose()) : MatrixXd::Zero(X.n, X.n);
    EXPECT_LE((displacement(D) - GB).norm(), tol * std::max(D.norm(), 1.0));
}

}  // namespace

TEST(Fft, MatchesNaiveDft)
{
    const int n = 12;
    Eigen::VectorXcd x(n), y(n);
    for (int k = 0; k < n; ++k)
        x[k] = {std::sin(k + 1.0), std::cos(2.0 * k)};
    for (int j = 0; j < n; ++j) {
        y[j] = 0.0;
        for (int k = 0; k < n; ++k)
            y[j] += x[k] * std::polar(1.0, -2.0 * std::numbers::pi * j * k / n);
    }
    Eigen::VectorXcd z = x;
    fft::forward(z);
    EXPECT_LE((z - y).norm(), 1e-13 * y.norm());
    fft::inverse(z);
    EXPECT_LE((z - x).norm(), 1e-14 * x.norm());
}

TEST(Displacement, DenseExamples)
{
    const Index n = 6;
    MatrixXd S = displacement(MatrixXd::Identity(n, n));
    MatrixXd ref = MatrixXd::Zero(n, n);
    ref(0, n - 1) = 2.0;
    EXPECT_EQ(S, ref);
    EXPECT_EQ(displacement(MatrixXd::Zero(n, n)), MatrixXd::Zero(n, n));

    MatrixXd Z1 = MatrixXd::Zero(n, n), Zm1 = MatrixXd::Zero(n, n);
    for (Index i = 1; i < n; ++i)
        Z1(i, i - 1) = Zm1(i, i - 1) = 1.0;
    Z1(0, n - 1) = 1.0;
    Zm1(0, n - 1) = -1.0;
    EXPECT_EQ(displacement(Z1), MatrixXd(Z1 * Z1 - Z1 * Zm1));
}

TEST(Identity, RankOneAndDense)
{
    auto I = tl_identity(9);
    EXPECT_EQ(I.tau(), 1);
    EXPECT_EQ(to_dense(I), MatrixXd::Identity(9, 9));
    auto J = from_toeplitz(ToeplitzInput::symmetric(VectorXd::Unit(9, 0)));
    EXPECT_EQ(J.tau(), 1);
    EXPECT_LE((to_dense(J) - MatrixXd::Identity(9, 9)).norm(), 1e-14);
}

TEST(FromToeplitz, RoundtripAndRank)
{
    for (Index n : {1, 2, 5, 64, 256}) {
        auto t = random_toeplitz(n, 10 + n);
        auto X = from_toeplitz(t);
        EXPECT_LE(X.tau(), 2);
        MatrixXd T = toeplitz_dense(t);
        EXPECT_LE((to_dense(X) - T).cwiseAbs().maxCoeff(), 1e-14 * T.cwiseAbs().maxCoeff());
        expect_displacement_identity(X);
    }
    EXPECT_THROW(from_toeplitz({VectorXd(3), VectorXd(4)}), DimensionError);
}

TEST(RankRules, AddScaleShift)
{
    auto t = random_toeplitz(64, 3), u = random_toeplitz(64, 4);
    auto X = from_toeplitz(t), Y = from_toeplitz(u);
    EXPECT_EQ(add(X, scale(-1.0, X)).tau(), 0);
    EXPECT_EQ(to_dense(scale(2.0, X)), MatrixXd(2.0 * to_dense(X)));
    auto S = add(X, Y);
    EXPECT_LE(S.tau(), X.tau() + Y.tau());
    EXPECT_LE(rel(to_dense(S), toeplitz_dense(t) + toeplitz_dense(u)), 1e-14);
    auto Z = shift(X, 0.7);
    EXPECT_LE(Z.tau(), X.tau() + 1);
    MatrixXd ref = toeplitz_dense(t) - 0.7 * MatrixXd::Identity(64, 64);
    EXPECT_LE(rel(to_dense(Z), ref), 1e-14);
    EXPECT_THROW(add(X, tl_identity(5)), DimensionError);
}

TEST(Multiply, DenseAgreement)
{
    auto t = random_toeplitz(64, 5), u = random_toeplitz(64, 6);
    auto X = from_toeplitz(t), Y = from_toeplitz(u);
    auto P = multiply(X, Y);
    EXPECT_LE(P.tau(), 5);
    EXPECT_LE(rel(to_dense(P), toeplitz_dense(t) * toeplitz_dense(u)), 1e-11);
    EXPECT_LE(rel(to_dense(multiply(X, tl_identity(64))), toeplitz_dense(t)), 1e-13);
    expect_displacement_identity(P);
}

TEST(Multiply, TimesInverseIsIdentity)
{
    auto t = gen_random_spd_toeplitz(64, 1.0, 1e3, 7);
    auto X = from_toeplitz(t);
    auto P = multiply(X, invert(X));
    EXPECT_LE((to_dense(P) - MatrixXd::Identity(64, 64)).norm(), 1e-9);
}

TEST(Invert, Examples)
{
    auto Ii = invert(tl_identity(16));
    EXPECT_EQ(Ii.tau(), 1);
    EXPECT_LE((to_dense(Ii) - MatrixXd::Identity(16, 16)).norm(), 1e-14);

    auto t = gen_random_spd_toeplitz(128, 1.0, 50.0, 8);
    auto X = from_toeplitz(t);
    auto Xs = shift(X, -2.5);
    MatrixXd ref = (toeplitz_dense(t) + 2.5 * MatrixXd::Identity(128, 128)).inverse();
    EXPECT_LE(rel(to_dense(invert(Xs)), ref), 1e-12);
    EXPECT_LE(invert(X).tau(), X.tau());
    EXPECT_THROW(invert(tl_zero(4)), SingularMatrix);
}

TEST(Transpose, DenseAgreement)
{
    for (Index n : {1, 2, 7, 64}) {
        auto t = random_toeplitz(n, 20 + n);
        auto X = multiply(from_toeplitz(t), from_toeplitz(random_toeplitz(n, 40 + n)));
        auto Y = transpose(X);
        EXPECT_LE(rel(to_dense(Y), to_dense(X).transpose()), 1e-13) << n;
        expect_displacement_identity(Y, 1e-12);
    }
}

TEST(Invert, Nonsymmetric)
{
    const Index n = 96;
    auto t = random_toeplitz(n, 21);
    t.col[0] += 3.0 * std::sqrt(double(n));
    t.row[0] = t.col[0];
    MatrixXd T = toeplitz_dense(t);
    EXPECT_LE(rel(to_dense(invert(from_toeplitz(t))), T.inverse()), 1e-12);
}

TEST(Invert, SingularRaises)
{
    ToeplitzInput t = ToeplitzInput::symmetric(VectorXd::Ones(8));
    EXPECT_THROW(invert(from_toeplitz(t)), SingularMatrix);
}

TEST(Matvec, DenseAgreement)
{
    VectorXd v = VectorXd::LinSpaced(256, -1.0, 2.0);
    EXPECT_LE((matvec(tl_identity(256), v) - v).norm(), 1e-14 * v.norm());
    auto t = random_toeplitz(256, 9);
    auto X = from_toeplitz(t);
    MatrixXd T = toeplitz_dense(t);
    EXPECT_LE((matvec(X, v) - T * v).norm(), 1e-12 * (T * v).norm());
    FastMatvec op(X);
    EXPECT_LE((op.apply_transpose(v) - T.transpose() * v).norm(), 1e-12 * (T.transpose() * v).norm());
    EXPECT_THROW(matvec(X, VectorXd(3)), DimensionError);
}

TEST(Matvec, LargeSizeIsFast)
{
    const Index n = Index(1) << 17;
    VectorXd c(n);
    for (Index i = 0; i < n; ++i)
        c[i] = 1.0 / (1.0 + static_cast<double>(i));
    auto X = from_toeplitz(ToeplitzInput::symmetric(c));
    ASSERT_EQ(X.tau(), 2);
    VectorXd v = VectorXd::Ones(n);
    auto t0 = std::chrono::steady_clock::now();
    VectorXd y = matvec(X, v);
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(sec, 1.0);
    // first entry is the harmonic sum H_n
    double h = 0.0;
    for (Index i = 0; i < n; ++i)
        h += c[i];
    EXPECT_NEAR(y[0], h, 1e-9 * h);
}

TEST(Solve, Backends)
{
    MatrixXd rhs = MatrixXd::Random(32, 3);
    EXPECT_LE((solve(tl_identity(32), rhs) - rhs).norm(), 1e-14 * rhs.norm());
    auto t = gen_random_spd_toeplitz(256, 1.0, 1e4, 11);
    auto X = from_toeplitz(t);
    MatrixXd T = toeplitz_dense(t);
    MatrixXd b = MatrixXd::Random(256, 2);
    DenseLUSolver lu;
    CGSolver cg;
    for (const Solver* s : {static_cast<const Solver*>(&lu), static_cast<const Solver*>(&cg)}) {
        MatrixXd x = solve(X, b, *s);
        EXPECT_LE((T * x - b).norm(), 1e-10 * 1e4 * b.norm()) << s->name();
        VectorXd v = VectorXd::Random(256);
        VectorXd w = solve(X, matvec(X, v), *s);
        EXPECT_LE((w - v).norm(), 1e-9 * v.norm()) << s->name();
    }
}

TEST(Compress, DuplicateColumns)
{
    auto X = from_toeplitz(random_toeplitz(64, 12));
    TLMatrix Y{64, MatrixXd(64, 6), MatrixXd(64, 6)};
    Y.G << X.G, X.G, X.G;
    Y.B << X.B / 3.0, X.B / 3.0, X.B / 3.0;
    auto Z = compress(Y);
    EXPECT_EQ(Z.tau(), 2);
    EXPECT_LE(rel(to_dense(Z), to_dense(X)), 1e-14);
}

TEST(NormEst, Identity)
{
    EXPECT_NEAR(norm_est(tl_identity(50)), 1.0, 1e-10);
    EXPECT_EQ(norm_est(tl_zero(5)), 0.0);
}

TEST(NormEst, AgainstDenseSpectralNorm)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto t = random_toeplitz(128, 100 + seed);
        Eigen::JacobiSVD<MatrixXd> svd(toeplitz_dense(t));
        double ref = svd.singularValues()[0];
        EXPECT_NEAR(norm_est(from_toeplitz(t)), ref, 0.01 * ref);
    }
}

TEST(RankRules, RandomInstances)
{
    for (Index n : {32, 64, 256})
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            auto a = random_toeplitz(n, 1000 + seed), b = random_toeplitz(n, 2000 + seed);
            auto X = from_toeplitz(a), Y = from_toeplitz(b);
            EXPECT_LE(X.tau(), 2);
            EXPECT_LE(add(X, Y).tau(), X.tau() + Y.tau());
            auto P = multiply(X, Y);
            EXPECT_LE(P.tau(), X.tau() + Y.tau() + 1);
            EXPECT_LE(rel(to_dense(P), toeplitz_dense(a) * toeplitz_dense(b)), 1e-9);
            auto s = gen_random_spd_toeplitz(n, 1.0, 100.0, 3000 + seed);
            auto S = from_toeplitz(s);
            auto Si = invert(S);
            EXPECT_LE(Si.tau(), S.tau());
            EXPECT_LE(rel(to_dense(Si), toeplitz_dense(s).inverse()), 1e-9 * 100.0);
            expect_displacement_identity(P, 1e-12);
            expect_displacement_identity(Si, 1e-12);
        }
}

TEST(ToeplitzFile, Roundtrip)
{
    auto t = random_toeplitz(7, 13);
    std::stringstream ss;
    write_toeplitz(ss, t);
    auto u = read_toeplitz(ss);
    EXPECT_EQ(u.col, t.col);
    EXPECT_EQ(u.row, t.row);
    std::stringstream bad("3\n1\n2\n");
    EXPECT_THROW(read_toeplitz(bad), DimensionError);
    std::stringstream empty("");
    EXPECT_THROW(read_toeplitz(empty), DimensionError);
}

TEST(Densify, CounterTracksReconstructions)
{
    auto X = from_toeplitz(random_toeplitz(16, 14));
    long before = densify_count();
    to_dense(X);
    EXPECT_EQ(densify_count(), before + 1);
    VectorXd v = VectorXd::Ones(16);
    matvec(X, v);
    invert(shift(X, -100.0), CGSolver());
    EXPECT_EQ(densify_count(), before + 1);
}
