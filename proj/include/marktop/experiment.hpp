#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "approx.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "interp.hpp"
#include "markov.hpp"
#include "matfun.hpp"
#include "tlalgebra.hpp"

namespace marktop {

/// (i) TL arithmetic on [lambda_min, lambda_max]; (ii) TL arithmetic on [c/2, 2d];
/// (iii) dense arithmetic; (iv) diagonal matrix of eigenvalues.
enum class Case { I, II, III, IV };

inline const char* case_name(Case c)
{
    switch (c) {
    case Case::I:
        return "i";
    case Case::II:
        return "ii";
    case Case::III:
        return "iii";
    case Case::IV:
        return "iv";
    }
    return "?";
}

struct MatrixSource {
    enum class Kind { File, Random, Cosine, Laplacian, Kms };
    Kind kind = Kind::Random;
    std::string path;
    Index n = 64;
    double lmin = 1.0, lmax = 100.0;  // random targets, or [c,d] of the cosine diagonal
    std::uint64_t seed = 1;
    double kms_a = 0.5;
};

enum class Method { Direct, LogScaled, PowerScaled };

struct ExperimentConfig {
    MarkovSpec spec = inv_sqrt_spec();
    Method method = Method::Direct;
    double gamma = -0.5;  // exponent for PowerScaled
    MatrixSource source;
    std::vector<Case> cases{Case::I};
    std::vector<Rep> reps{Rep::PFD};
    int m_max = 30;
    bool run_to_m_max = true;
    bool use_cg = false;
    /// Worker cap; 0 reads MARKTOP_THREADS and falls back to the hardware count.
    int threads = 0;
    Index oracle_max_n = 1024;
};

struct ExperimentRow {
    Case kase = Case::I;
    Rep rep = Rep::PFD;
    int m = 0;
    double rel_err = 0.0;
    double apriori = 0.0;
    double residual = 0.0;
    bool accepted = false;
    Index tau = 0;
    double wall_ms = 0.0;
};

inline std::string csv_header() { return "case,rep,m,rel_err,apriori,residual,accepted,tau,wall_ms"; }

inline std::string csv_row(const ExperimentRow& r)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6e,%.6e,%.6e,%s,%ld,%.3f", case_name(r.kase), rep_name(r.rep), r.m,
                  r.rel_err, r.apriori, r.residual, r.accepted ? "true" : "false", static_cast<long>(r.tau), r.wall_ms);
    return buf;
}

inline int worker_count(int requested, std::size_t jobs)
{
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("MARKTOP_THREADS"))
            n = std::atoi(env);
    }
    if (n <= 0)
        n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::max(1, std::min(n, static_cast<int>(jobs)));
}

/// Runs jobs[0..n) on up to `workers` threads; results keep job order. The first failure
/// in job order is rethrown after all workers finish.
template <typename R, typename F>
std::vector<R> run_ordered(std::size_t njobs, int workers, F&& job)
{
    std::vector<R> out(njobs);
    std::vector<std::exception_ptr> err(njobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < njobs;) {
            try {
                out[i] = job(i);
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    for (auto& e : err)
        if (e)
            std::rethrow_exception(e);
    return out;
}

namespace detail {

struct PreparedMatrix {
    bool toeplitz = false;
    ToeplitzInput t;
    VectorXd diag;  // cosine source
    double c = 0.0, d = 0.0;
    MatrixXd dense;  // empty when above the oracle cap
    VectorXd eig;
};

inline PreparedMatrix prepare(const ExperimentConfig& cfg)
{
    const auto& s = cfg.source;
    PreparedMatrix p;
    switch (s.kind) {
    case MatrixSource::Kind::File: {
        std::ifstream in(s.path);
        if (!in)
            throw ConfigError("cannot open matrix file " + s.path);
        p.t = read_toeplitz(in);
        p.toeplitz = true;
        break;
    }
    case MatrixSource::Kind::Random:
        p.t = gen_random_spd_toeplitz(s.n, s.lmin, s.lmax, s.seed);
        p.toeplitz = true;
        break;
    case MatrixSource::Kind::Laplacian:
        p.t = laplacian1d(s.n);
        p.toeplitz = true;
        break;
    case MatrixSource::Kind::Kms:
        p.t = kms(s.n, s.kms_a);
        p.toeplitz = true;
        break;
    case MatrixSource::Kind::Cosine: {
        if (!(s.lmin > 0.0 && s.lmax > s.lmin))
            throw InvalidInterval("need 0 < c < d for the cosine diagonal");
        auto x = cosine_points(s.lmin, s.lmax, static_cast<int>(s.n));
        p.diag = Eigen::Map<VectorXd>(x.data(), static_cast<Index>(x.size()));
        p.c = s.lmin;
        p.d = s.lmax;
        p.eig = p.diag;
        return p;
    }
    }
    const Index n = p.t.col.size();
    if (n <= std::max<Index>(cfg.oracle_max_n, 2048)) {
        MatrixXd T = toeplitz_dense(p.t);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
        p.eig = es.eigenvalues();
        p.c = p.eig[0];
        p.d = p.eig[n - 1];
        if (n <= cfg.oracle_max_n)
            p.dense = std::move(T);
    } else if (s.kind == MatrixSource::Kind::Laplacian) {
        std::tie(p.c, p.d) = laplacian1d_extremes(n);
    } else if (s.kind == MatrixSource::Kind::Kms) {
        std::tie(p.c, p.d) = kms_bounds(s.kms_a);
    } else {
        TLMatrix X = from_toeplitz(p.t);
        p.d = 1.01 * norm_est(X);
        p.c = 0.99 / norm_est(invert(X, CGSolver()));
    }
    if (!(p.c > 0.0))
        throw ConfigError("matrix is not positive definite");
    return p;
}

inline std::function<double(double)> target_function(const ExperimentConfig& cfg)
{
    if (cfg.method == Method::LogScaled)
        return [](double x) { return std::log(x); };
    if (cfg.method == Method::PowerScaled) {
        double g = cfg.gamma;
        return [g](double x) { return std::pow(x, g); };
    }
    MarkovSpec s = cfg.spec;
    return [s](double x) { return eval_markov(s, x); };
}

}  // namespace detail

/// One row per (case, representation, m), in case-major then representation order.
inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg)
{
    if (cfg.cases.empty() || cfg.reps.empty())
        throw ConfigError("no cases or representations selected");
    if (cfg.m_max < 1)
        throw ConfigError("m_max must be positive");
    detail::PreparedMatrix P = detail::prepare(cfg);
    for (Case k : cfg.cases)
        if (!P.toeplitz && (k == Case::I || k == Case::II))
            throw ConfigError("Toeplitz-like cases need a Toeplitz matrix source");
    auto f = detail::target_function(cfg);
    const bool markov_error = cfg.method == Method::Direct;

    // Oracle values on the eigenbasis (case iv) and dense (cases i-iii)
    MatrixXd F;
    if (P.dense.size() > 0)
        F = oracle::function_of(P.dense, f);
    VectorXd Fd = P.eig.size() ? VectorXd(P.eig.unaryExpr(f)) : VectorXd();

    const CGSolver cg;
    struct Job {
        Case kase;
        Rep rep;
    };
    std::vector<Job> jobs;
    for (Case k : cfg.cases)
        for (Rep r : cfg.reps)
            jobs.push_back({k, r});

    auto run_job = [&](std::size_t idx) {
        const Job& job = jobs[idx];
        MatArg A;
        A.c = P.c;
        A.d = P.d;
        if (cfg.use_cg)
            A.solver = &cg;
        bool diag = false;
        switch (job.kase) {
        case Case::I:
        case Case::II:
            A.value = from_toeplitz(P.t);
            break;
        case Case::III:
            A.value = P.toeplitz ? toeplitz_dense(P.t) : MatrixXd(P.diag.asDiagonal());
            break;
        case Case::IV:
            if (P.eig.size() == 0)
                throw ConfigError("case iv needs the eigenvalues, matrix too large");
            A.value = Diagonal{P.eig};
            diag = true;
            break;
        }
        AutoDegreeOptions opt;
        opt.rep = job.rep;
        opt.m_max = cfg.m_max;
        opt.run_to_m_max = cfg.run_to_m_max;
        opt.enlarge = job.kase == Case::II;
        auto measure = [&](const MatValue& R) {
            if (diag) {
                const VectorXd& r = std::get<Diagonal>(R).values;
                return markov_error ? (VectorXd::Ones(r.size()) - r.cwiseQuotient(Fd)).cwiseAbs().maxCoeff()
                                    : (r - Fd).cwiseAbs().maxCoeff() / Fd.cwiseAbs().maxCoeff();
            }
            if (F.size() == 0)
                return std::numeric_limits<double>::quiet_NaN();
            MatrixXd Rd = to_dense(R);
            return markov_error ? oracle::relative_error(Rd, F) : oracle::normwise_error(Rd, F);
        };
        opt.on_degree = [&](DegreeRecord& rec, const MatValue& R) { rec.rel_err = measure(R); };
        MatFunResult res;
        switch (cfg.method) {
        case Method::Direct:
            res = auto_degree(cfg.spec, A, matrix_geometry(cfg.spec, A.c, A.d, opt.enlarge), opt);
            break;
        case Method::LogScaled:
            res = log_via_scaling(A, opt);
            break;
        case Method::PowerScaled:
            res = frac_power(A, cfg.gamma, true, opt);
            break;
        }
        std::vector<ExperimentRow> rows;
        // an integer power of the scaled matrix needs no interpolant; report it as m = 0
        if (res.history.empty())
            rows.push_back({job.kase, job.rep, 0, measure(res.approximation), 0.0, 0.0, true,
                            generator_width(res.approximation), 0.0});
        for (const auto& h : res.history)
            rows.push_back({job.kase, job.rep, h.m, h.rel_err, h.apriori, h.residual, h.accepted, h.tau, h.wall_ms});
        return rows;
    };
    auto per_job = run_ordered<std::vector<ExperimentRow>>(jobs.size(), worker_count(cfg.threads, jobs.size()), run_job);
    std::vector<ExperimentRow> rows;
    for (auto& v : per_job)
        rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

struct ScanRow {
    Rep rep = Rep::PFD;
    int m = 0;
    double rel_err = 0.0;
    double eta = 0.0;
    double apriori = 0.0;
    double residual = 0.0;
    bool accepted = false;
};

inline std::string scan_header() { return "rep,m,rel_err,eta,apriori,residual,accepted"; }

inline std::string scan_row(const ScanRow& r)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%d,%.6e,%.6e,%.6e,%.6e,%s", rep_name(r.rep), r.m, r.rel_err, r.eta, r.apriori,
                  r.residual, r.accepted ? "true" : "false");
    return buf;
}

/// Scalar relative errors on `points` cosine points of [c,d] with optimal nodes; the residual is
/// the scalar worst-case residual on the same grid.
inline std::vector<ScanRow> run_scan(const MarkovSpec& spec, double c, double d, int m_min, int m_max,
                                     const std::vector<Rep>& reps, int points = 500)
{
    if (m_min < 1 || m_max < m_min)
        throw ConfigError("need 1 <= m_min <= m_max");
    if (points < 2)
        throw ConfigError("need at least two grid points");
    Geometry g = build_geometry(spec.alpha, spec.beta, c, d);
    auto grid = cosine_points(c, d, points);
    MatArg A;
    A.value = Diagonal{Eigen::Map<VectorXd>(grid.data(), points)};
    A.c = c;
    A.d = d;
    MarkovSpec nu = worst_case_spec(g.alpha, g.beta);
    std::vector<ScanRow> rows;
    for (Rep rep : reps)
        for (int m = m_min; m <= m_max; ++m) {
            ScanRow row;
            row.rep = rep;
            row.m = m;
            NodeSet ns = optimal_nodes(g, m);
            row.eta = blaschke_eta(g, ns);
            try {
                row.apriori = apriori_bound(g, m);
            } catch (const BoundInvalid&) {
                row.apriori = inf;
            }
            try {
                auto r = fit_interpolant(rep, spec, ns);
                row.rel_err = interp_error_scan(spec, r, grid).max_rel_err;
                row.residual = residual_sqrt(A, fit_interpolant(rep, nu, ns), g);
            } catch (const NumericalError&) {
                row.rel_err = std::numeric_limits<double>::quiet_NaN();
                row.residual = inf;
            }
            row.accepted = row.residual < stopping_threshold(g, m);
            rows.push_back(row);
        }
    return rows;
}

}  // namespace marktop
