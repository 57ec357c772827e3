#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include <marktop/experiment.hpp>

using namespace marktop;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.source.kind = MatrixSource::Kind::Random;
    cfg.source.n = 48;
    cfg.source.lmin = 1.0;
    cfg.source.lmax = 50.0;
    cfg.source.seed = 5;
    cfg.m_max = 10;
    cfg.threads = 2;
    return cfg;
}

std::string without_time(const ExperimentRow& r)
{
    ExperimentRow s = r;
    s.wall_ms = 0.0;
    return csv_row(s);
}

}  // namespace

TEST(Csv, HeaderAndRow)
{
    EXPECT_EQ(csv_header(), "case,rep,m,rel_err,apriori,residual,accepted,tau,wall_ms");
    ExperimentRow r{Case::II, Rep::Thiele, 3, 1.5e-7, 2e-6, 3e-6, true, 4, 1.25};
    EXPECT_EQ(csv_row(r), "ii,thiele,3,1.500000e-07,2.000000e-06,3.000000e-06,true,4,1.250");
    EXPECT_EQ(scan_header(), "rep,m,rel_err,eta,apriori,residual,accepted");
}

TEST(Experiment, DeterministicApartFromTiming)
{
    auto cfg = small_config();
    cfg.cases = {Case::I, Case::III};
    cfg.reps = {Rep::PFD, Rep::Bary};
    auto a = run_experiment(cfg);
    cfg.threads = 1;
    auto b = run_experiment(cfg);
    ASSERT_EQ(a.size(), b.size());
    ASSERT_EQ(a.size(), 4u * static_cast<std::size_t>(cfg.m_max));
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(without_time(a[i]), without_time(b[i]));
    EXPECT_EQ(a.front().kase, Case::I);
    EXPECT_EQ(a.back().kase, Case::III);
    EXPECT_EQ(a.back().rep, Rep::Bary);
}

TEST(Experiment, AcceptedFlagAgreesWithThreshold)
{
    auto cfg = small_config();
    cfg.cases = {Case::I, Case::IV};
    cfg.m_max = 20;
    auto rows = run_experiment(cfg);
    for (const auto& r : rows) {
        EXPECT_GE(r.m, 1);
        if (r.accepted)
            EXPECT_LE(r.rel_err, 5.0 * r.apriori + 1e-12) << csv_row(r);
    }
    int first_reject = 0;
    for (const auto& r : rows)
        if (r.kase == Case::I && !r.accepted) {
            first_reject = r.m;
            break;
        }
    EXPECT_GT(first_reject, 1);
}

TEST(Experiment, CaseFourRepresentationsAgree)
{
    auto cfg = small_config();
    cfg.cases = {Case::IV};
    cfg.reps = {Rep::PFD, Rep::Bary, Rep::Thiele};
    cfg.m_max = 5;
    auto rows = run_experiment(cfg);
    ASSERT_EQ(rows.size(), 15u);
    for (int m = 0; m < 5; ++m) {
        double e = rows[m].rel_err;
        EXPECT_NEAR(rows[5 + m].rel_err, e, 1e-3 * e + 1e-13);
        EXPECT_NEAR(rows[10 + m].rel_err, e, 1e-3 * e + 1e-13);
    }
}

TEST(Experiment, EnlargedIntervalNeedsLargerDegree)
{
    auto cfg = small_config();
    cfg.cases = {Case::I, Case::II};
    cfg.run_to_m_max = false;
    cfg.m_max = 20;
    auto rows = run_experiment(cfg);
    // both cases stop at the rounding floor, so compare the degree that first reaches 1e-8
    int first_i = 0, first_ii = 0;
    for (const auto& r : rows) {
        int& first = r.kase == Case::I ? first_i : first_ii;
        if (first == 0 && r.rel_err < 1e-8)
            first = r.m;
    }
    ASSERT_GT(first_i, 0);
    EXPECT_GT(first_ii, first_i);
}

TEST(Experiment, ThreadCapFromEnvironment)
{
    auto cfg = small_config();
    cfg.cases = {Case::III, Case::IV};
    cfg.reps = {Rep::PFD, Rep::Thiele};
    cfg.m_max = 4;
    cfg.threads = 0;
    ::setenv("MARKTOP_THREADS", "3", 1);
    EXPECT_EQ(worker_count(0, 10), 3);
    auto a = run_experiment(cfg);
    ::setenv("MARKTOP_THREADS", "1", 1);
    auto b = run_experiment(cfg);
    ::unsetenv("MARKTOP_THREADS");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(without_time(a[i]), without_time(b[i]));
    EXPECT_EQ(worker_count(8, 2), 2);
}

TEST(Experiment, ConfigErrors)
{
    auto cfg = small_config();
    cfg.cases = {};
    EXPECT_THROW(run_experiment(cfg), ConfigError);
    cfg = small_config();
    cfg.source.kind = MatrixSource::Kind::Cosine;
    EXPECT_THROW(run_experiment(cfg), ConfigError);
    cfg.source.kind = MatrixSource::Kind::File;
    cfg.source.path = "/nonexistent/marktop.txt";
    EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Experiment, LogAndPowerMethods)
{
    auto cfg = small_config();
    cfg.cases = {Case::III};
    cfg.source.lmax = 1e3;
    cfg.run_to_m_max = false;
    for (Method meth : {Method::LogScaled, Method::PowerScaled}) {
        cfg.method = meth;
        cfg.gamma = -0.3;
        auto rows = run_experiment(cfg);
        double best = inf;
        for (const auto& r : rows)
            if (r.accepted)
                best = r.rel_err;
        EXPECT_LT(best, 1e-8);
    }
}

TEST(Experiment, IntegerScaledPowerGivesSingleRow)
{
    auto cfg = small_config();
    cfg.cases = {Case::III};
    cfg.source.lmax = 1e3;
    cfg.method = Method::PowerScaled;
    cfg.gamma = -0.25;  // 2^2 gamma = -1
    auto rows = run_experiment(cfg);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].m, 0);
    EXPECT_LT(rows[0].rel_err, 1e-9);
}

TEST(Generators, RandomSpdToeplitz)
{
    auto a = gen_random_spd_toeplitz(64, 25.0, 139.2, 9);
    auto b = gen_random_spd_toeplitz(64, 25.0, 139.2, 9);
    EXPECT_EQ(a.col, b.col);
    EXPECT_EQ(a.col, a.row);
    auto [lo, hi] = symmetric_extremes(toeplitz_dense(a));
    EXPECT_NEAR(lo, 25.0, 0.25);
    EXPECT_NEAR(hi, 139.2, 1.392);
    EXPECT_NEAR(hi / lo, 5.568, 0.12);
    EXPECT_NE(gen_random_spd_toeplitz(64, 25.0, 139.2, 10).col, a.col);
}

TEST(Generators, LaplacianAndKms)
{
    auto [lo, hi] = symmetric_extremes(toeplitz_dense(laplacian1d(40)));
    auto [elo, ehi] = laplacian1d_extremes(40);
    EXPECT_NEAR(lo, elo, 1e-12);
    EXPECT_NEAR(hi, ehi, 1e-12);
    auto [klo, khi] = symmetric_extremes(toeplitz_dense(kms(200, 0.5)));
    auto [blo, bhi] = kms_bounds(0.5);
    EXPECT_GE(klo, blo);
    EXPECT_LE(khi, bhi);
}

TEST(Scan, ThresholdsAndRates)
{
    auto rows = run_scan(inv_sqrt_spec(), 0.5, 1.0, 1, 6, {Rep::PFD, Rep::Thiele});
    ASSERT_EQ(rows.size(), 12u);
    auto g = build_geometry(-inf, 0.0, 0.5, 1.0);
    for (const auto& r : rows) {
        EXPECT_EQ(r.accepted, r.residual < stopping_threshold(g, r.m));
        if (r.apriori > 1e-12)
            EXPECT_LE(r.rel_err, r.apriori);
    }
    EXPECT_THROW(run_scan(inv_sqrt_spec(), 0.5, 1.0, 3, 2, {Rep::PFD}), ConfigError);
}

TEST(Scan, RationalFunctionAtRoundingLevel)
{
    auto s = custom_spec(-2.0, -1.0, [](double z) { return 1.0 / (z + 1.5); },
                         [](std::complex<double> z) { return 1.0 / (z + 1.5); });
    for (const auto& r : run_scan(s, 1.0, 4.0, 1, 1, {Rep::PFD, Rep::Bary, Rep::Thiele}))
        EXPECT_LE(r.rel_err, 1e-13) << scan_row(r);
}
