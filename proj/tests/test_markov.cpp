#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include <marktop/markov.hpp>

using namespace marktop;

TEST(EvalMarkov, CatalogValues)
{
    EXPECT_DOUBLE_EQ(eval_markov(inv_sqrt_spec(), 4.0), 0.5);
    EXPECT_DOUBLE_EQ(eval_markov(log_spec(), 1.0), 1.0);
    EXPECT_NEAR(eval_markov(log_spec(), std::exp(1.0)), 1.0 / (std::exp(1.0) - 1.0), 1e-15);
    EXPECT_NEAR(eval_markov(worst_case_spec(-1.0, 0.0), 3.0), 1.0 / std::sqrt(12.0), 1e-15);
    EXPECT_NEAR(eval_markov(power_spec(-1.0 / 3.0), 8.0), 0.5, 1e-15);
}

TEST(EvalMarkov, RejectsArgumentsOnSupport)
{
    EXPECT_THROW(eval_markov(inv_sqrt_spec(), 0.0), DomainError);
    EXPECT_THROW(eval_markov(inv_sqrt_spec(), -1.0), DomainError);
    EXPECT_THROW(eval_markov(worst_case_spec(-1.0, 2.0), 1.5), DomainError);
}

TEST(EvalMarkov, PositiveAndDecreasing)
{
    for (const auto& s : {inv_sqrt_spec(), log_spec(), power_spec(-0.5), power_spec(-0.9), worst_case_spec(-1.0, 0.0)}) {
        double prev = inf;
        for (int k = -6; k <= 6; ++k) {
            double v = eval_markov(s, s.beta + std::pow(10.0, k));
            EXPECT_GT(v, 0.0);
            EXPECT_LT(v, prev);
            prev = v;
        }
    }
}

TEST(WorstCase, LimitAndIdentity)
{
    EXPECT_DOUBLE_EQ(eval_markov(worst_case_spec(-inf, 0.0), 4.0), 0.5);
    auto s = worst_case_spec(-1.0, 0.0);
    for (double z : {0.1, 1.0, 7.5, 1e3}) {
        double f = eval_markov(s, z);
        EXPECT_NEAR(f * f * (z + 1.0) * z, 1.0, 1e-13);
    }
    auto t = worst_case_spec(-inf, 2.0);
    for (double z : {2.5, 10.0}) {
        double f = eval_markov(t, z);
        EXPECT_NEAR(f * f * (z - 2.0), 1.0, 1e-13);
    }
    EXPECT_THROW(worst_case_spec(0.0, -1.0), InvalidInterval);
}

TEST(PowerSpec, ExponentRange)
{
    EXPECT_NO_THROW(power_spec(-1.0));
    EXPECT_THROW(power_spec(0.0), DomainError);
    EXPECT_THROW(power_spec(-1.5), DomainError);
}

TEST(Hankel, SmallExamples)
{
    auto H0 = hankel_matrix(inv_sqrt_spec(), 1.0, 0, 0);
    ASSERT_EQ(H0.rows(), 1);
    EXPECT_DOUBLE_EQ(H0(0, 0), 1.0);
    auto H1 = hankel_matrix(inv_sqrt_spec(), 1.0, 0, 1);
    EXPECT_DOUBLE_EQ(H1(0, 0), -0.5);
}

TEST(Hankel, WorstCaseDeterminant)
{
    // mpmath: g = (0.40824829046386301637, -0.17010345435994292349, 0.072293968102975742482), det = 1/1728
    auto H = hankel_matrix(worst_case_spec(-1.0, 0.0), 2.0, 1, 0);
    EXPECT_NEAR(H(0, 0), 0.40824829046386301637, 1e-14);
    EXPECT_NEAR(H(0, 1), -0.17010345435994292349, 1e-14);
    EXPECT_NEAR(H(1, 1), 0.072293968102975742482, 1e-14);
    EXPECT_NEAR(H.determinant(), 1.0 / 1728.0, 1e-15);
}

TEST(Hankel, TaylorCoefficientsMatchDerivatives)
{
    // log(z)/(z-1) at z0 = 2: g_1 = f'(2) = 1/2 - log 2
    auto g = taylor_coefficients(log_spec(), 2.0, 3);
    EXPECT_NEAR(g[0], std::log(2.0), 1e-15);
    EXPECT_NEAR(g[1], 0.5 - std::log(2.0), 1e-14);
    // z^{-1/3} at z0 = 8: g_2 = (-1/3)(-4/3)/2 8^{-7/3}
    auto p = taylor_coefficients(power_spec(-1.0 / 3.0), 8.0, 3);
    EXPECT_NEAR(p[2], (2.0 / 9.0) * std::pow(8.0, -7.0 / 3.0), 1e-16);
}

TEST(Hankel, CustomFromComplexEvaluator)
{
    auto f = [](double z) { return 1.0 / std::sqrt(z); };
    auto fc = [](std::complex<double> z) { return 1.0 / std::sqrt(z); };
    auto s = custom_spec(-inf, 0.0, f, fc);
    auto g = taylor_coefficients(s, 2.0, 7);
    auto h = taylor_coefficients(inv_sqrt_spec(), 2.0, 7);
    for (int j = 0; j < 7; ++j)
        EXPECT_NEAR(g[j], h[j], 1e-12 * std::abs(h[0]));
}

TEST(Hankel, DefinitenessExamples)
{
    EXPECT_TRUE(check_hankel_definiteness(inv_sqrt_spec(), 2.0, 4).pass);
    EXPECT_TRUE(check_hankel_definiteness(worst_case_spec(-1.0, 0.0), 1.5, 4).pass);
    auto lin = custom_spec(-inf, 0.0, [](double z) { return z; }, [](std::complex<double> z) { return z; });
    EXPECT_FALSE(check_hankel_definiteness(lin, 2.0, 2).pass);
}

TEST(Hankel, CatalogInfiniteSupport)
{
    for (const auto& s : {inv_sqrt_spec(), log_spec(), power_spec(-0.5), power_spec(-1.0 / 3.0), worst_case_spec(-inf, 0.0)})
        for (double dz : {0.5, 1.0, 10.0}) {
            auto rep = check_hankel_definiteness(s, s.beta + dz, 6);
            EXPECT_TRUE(rep.pass) << s.name << " z0=" << s.beta + dz;
            EXPECT_EQ(rep.min_eig_pos.size(), 7u);
            EXPECT_EQ(rep.max_eig_neg.size(), 7u);
        }
}

TEST(Hankel, PointMassFailsPastSupportSize)
{
    auto s = custom_spec(-1.0, 0.0, [](double z) { return 1.0 / z; }, [](std::complex<double> z) { return 1.0 / z; });
    EXPECT_TRUE(check_hankel_definiteness(s, 1.0, 0).pass);
    EXPECT_FALSE(check_hankel_definiteness(s, 1.0, 2).pass);
}
