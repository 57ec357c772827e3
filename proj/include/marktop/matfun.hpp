#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "approx.hpp"
#include "errors.hpp"
#include "interp.hpp"
#include "markov.hpp"
#include "tlalgebra.hpp"

namespace marktop {

/// Symmetric matrix given by its eigenvalues.
struct Diagonal {
    VectorXd values;
};

using MatValue = std::variant<MatrixXd, TLMatrix, Diagonal>;

/// Matrix argument with spectral bounds c <= lambda_min, lambda_max <= d.
struct MatArg {
    MatValue value;
    double c = 0.0;
    double d = 0.0;
    const Solver* solver = &default_solver();

    Index n() const
    {
        return std::visit(
            [](const auto& v) -> Index {
                using V = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<V, MatrixXd>)
                    return v.rows();
                else if constexpr (std::is_same_v<V, TLMatrix>)
                    return v.n;
                else
                    return v.values.size();
            },
            value);
    }
};

inline MatrixXd to_dense(const MatValue& v)
{
    return std::visit(
        [](const auto& x) -> MatrixXd {
            using V = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<V, MatrixXd>)
                return x;
            else if constexpr (std::is_same_v<V, TLMatrix>)
                return to_dense(x);
            else
                return x.values.asDiagonal();
        },
        v);
}

inline Index generator_width(const MatValue& v)
{
    const auto* t = std::get_if<TLMatrix>(&v);
    return t ? t->tau() : 0;
}

struct EvalStats {
    Index peak_tau = 0;  // widest generator formed before compression
};

namespace detail {

inline double dense_norm2(const MatrixXd& a)
{
    if (a.size() == 0)
        return 0.0;
    Eigen::BDCSVD<MatrixXd> svd(a);
    return svd.singularValues()[0];
}

struct DenseOps {
    using M = MatrixXd;
    Index n;

    M zero() const { return M::Zero(n, n); }
    M eye() const { return M::Identity(n, n); }
    M add(const M& a, const M& b) const { return a + b; }
    M scale(double s, const M& a) const { return s * a; }
    M shift(const M& a, double z) const
    {
        M r = a;
        r.diagonal().array() -= z;
        return r;
    }
    M mul(const M& a, const M& b) const { return a * b; }
    static Eigen::PartialPivLU<M> lu(const M& a)
    {
        Eigen::PartialPivLU<M> f(a);
        if (!(f.rcond() > 1e-15))
            throw SingularMatrix("matrix is numerically singular");
        return f;
    }
    M inv(const M& a) const { return lu(a).inverse(); }
    /// x a^{-1}
    M right_solve(const M& x, const M& a) const { return lu(a.transpose()).solve(x.transpose()).transpose(); }
    double norm(const M& a) const { return dense_norm2(a); }
    Index tau(const M&) const { return 0; }
};

struct DiagOps {
    using M = Diagonal;
    Index n;

    M zero() const { return {VectorXd::Zero(n)}; }
    M eye() const { return {VectorXd::Ones(n)}; }
    M add(const M& a, const M& b) const { return {a.values + b.values}; }
    M scale(double s, const M& a) const { return {s * a.values}; }
    M shift(const M& a, double z) const { return {a.values.array() - z}; }
    M mul(const M& a, const M& b) const { return {a.values.cwiseProduct(b.values)}; }
    M inv(const M& a) const
    {
        for (Index i = 0; i < n; ++i)
            if (!(std::abs(a.values[i]) > tiny))
                throw SingularMatrix("zero eigenvalue");
        return {a.values.cwiseInverse()};
    }
    M right_solve(const M& x, const M& a) const { return mul(x, inv(a)); }
    double norm(const M& a) const { return n ? a.values.cwiseAbs().maxCoeff() : 0.0; }
    Index tau(const M&) const { return 0; }
};

struct TLOps {
    using M = TLMatrix;
    Index n;
    const Solver* solver;
    EvalStats* stats;

    void note(Index w) const
    {
        if (stats)
            stats->peak_tau = std::max(stats->peak_tau, w);
    }
    M zero() const { return tl_zero(n); }
    M eye() const { return tl_identity(n); }
    M add(const M& a, const M& b) const
    {
        note(a.tau() + b.tau());
        return marktop::add(a, b);
    }
    M scale(double s, const M& a) const { return marktop::scale(s, a); }
    M shift(const M& a, double z) const
    {
        note(a.tau() + 1);
        return marktop::shift(a, z);
    }
    M mul(const M& a, const M& b) const
    {
        note(a.tau() + b.tau() + 1);
        return multiply(a, b);
    }
    M inv(const M& a) const { return invert(a, *solver); }
    M right_solve(const M& x, const M& a) const { return mul(x, inv(a)); }
    double norm(const M& a) const { return norm_est(a); }
    Index tau(const M& a) const { return a.tau(); }
};

template <typename F>
decltype(auto) with_ops(const MatValue& v, const Solver* solver, EvalStats* stats, F&& f)
{
    return std::visit(
        [&](const auto& x) -> decltype(auto) {
            using V = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<V, MatrixXd>)
                return f(DenseOps{x.rows()}, x);
            else if constexpr (std::is_same_v<V, TLMatrix>)
                return f(TLOps{x.n, solver ? solver : &default_solver(), stats}, x);
            else
                return f(DiagOps{x.values.size()}, x);
        },
        v);
}

template <typename Ops>
typename Ops::M eval_rational(const Ops& ops, const RationalInterpolant& r, const typename Ops::M& A)
{
    using M = typename Ops::M;
    return std::visit(
        [&](const auto& f) -> M {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PartialFraction>) {
                M acc = ops.zero();
                for (std::size_t j = 0; j < f.poles.size(); ++j)
                    acc = ops.add(acc, ops.scale(f.residuals[j], ops.inv(ops.shift(A, f.poles[j]))));
                return acc;
            } else if constexpr (std::is_same_v<F, Barycentric>) {
                M P = ops.zero(), Q = ops.zero();
                for (std::size_t j = 0; j < f.support.size(); ++j) {
                    M R = ops.inv(ops.shift(A, f.support[j]));
                    P = ops.add(P, ops.scale(f.values[j] * f.weights[j], R));
                    Q = ops.add(Q, ops.scale(f.weights[j], R));
                }
                return ops.right_solve(P, Q);
            } else {
                const std::size_t M_ = f.params.size();
                M R = ops.scale(f.params[M_ - 1], ops.eye());
                for (std::size_t j = M_ - 1; j-- > 0;)
                    R = ops.add(ops.scale(f.params[j], ops.eye()), ops.right_solve(ops.shift(A, f.nodes[j]), R));
                return f.reciprocal ? ops.inv(R) : R;
            }
        },
        r.form);
}

/// (A - alpha I)(A - beta I)/|alpha|, or A - beta I when alpha = -inf.
template <typename Ops>
typename Ops::M worst_case_weight(const Ops& ops, const typename Ops::M& A, const Geometry& g)
{
    if (std::isinf(g.alpha))
        return ops.shift(A, g.beta);
    double s = worst_case_scale(g.alpha);
    return ops.scale(1.0 / (s * s), ops.mul(ops.shift(A, g.alpha), ops.shift(A, g.beta)));
}

template <typename Ops>
double residual_sqrt(const Ops& ops, const typename Ops::M& A, const typename Ops::M& Rnu, const Geometry& g)
{
    auto W = worst_case_weight(ops, A, g);
    return ops.norm(ops.shift(ops.mul(ops.mul(Rnu, W), Rnu), 1.0));
}

template <typename Ops>
typename Ops::M int_power(const Ops& ops, const typename Ops::M& A, int k)
{
    auto X = ops.eye();
    for (int i = 0; i < std::abs(k); ++i)
        X = k > 0 ? ops.mul(X, A) : ops.right_solve(X, A);
    return X;
}

inline void check_poles(const RationalInterpolant& r, double c, double d)
{
    const auto* pf = std::get_if<PartialFraction>(&r.form);
    if (!pf)
        return;
    double tol = 1e-10 * (d - c);
    for (double x : pf->poles)
        if (x >= c - tol && x <= d + tol)
            throw PoleCollision("pole of the interpolant lies on the spectral interval");
}

}  // namespace detail

inline MatValue eval_rational_at_matrix(const RationalInterpolant& r, const MatArg& A, EvalStats* stats = nullptr)
{
    if (A.d > A.c)
        detail::check_poles(r, A.c, A.d);
    return detail::with_ops(A.value, A.solver, stats,
                            [&](const auto& ops, const auto& x) -> MatValue { return detail::eval_rational(ops, r, x); });
}

/// Spectral norm of I - r_nu(A) W(A) r_nu(A), W(A) = (A - alpha I)(A - beta I)/|alpha|.
inline double residual_sqrt(const MatArg& A, const RationalInterpolant& r_nu, const Geometry& g)
{
    return detail::with_ops(A.value, A.solver, nullptr, [&](const auto& ops, const auto& x) {
        auto R = detail::eval_rational(ops, r_nu, x);
        return detail::residual_sqrt(ops, x, R, g);
    });
}

/// ((1 + delta)/(1 - delta)) |I - r_m(A) r_mp(A)^{-1}|, delta = 4 eta'/(1 - eta')^2 from the nodes of r_mp.
inline double aposteriori_bound(const MatArg& A, const RationalInterpolant& r_m, const RationalInterpolant& r_mp,
                                const Geometry& g, const NodeSet& extra_nodes)
{
    if (extra_nodes.nodes.empty())
        throw BoundInvalid("no extra nodes");
    const double cap = (std::sqrt(2.0) - 1.0) * (std::sqrt(2.0) - 1.0);
    if (!(blaschke_eta(g, r_m.nodes) <= cap))
        throw BoundInvalid("eta_2m exceeds (sqrt2 - 1)^2");
    double et = blaschke_eta(g, extra_nodes);
    if (!(et < 1.0))
        throw BoundInvalid("eta of the extra nodes is not below one");
    double delta = 4.0 * et / ((1.0 - et) * (1.0 - et));
    if (!(delta < 1.0))
        throw BoundInvalid("delta >= 1");
    double e = detail::with_ops(A.value, A.solver, nullptr, [&](const auto& ops, const auto& x) {
        auto Rm = detail::eval_rational(ops, r_m, x);
        auto Rp = detail::eval_rational(ops, r_mp, x);
        return ops.norm(ops.shift(ops.right_solve(Rm, Rp), 1.0));
    });
    return (1.0 + delta) / (1.0 - delta) * e;
}

struct DegreeRecord {
    int m = 0;
    double residual = inf;
    double threshold = inf;  // stopping threshold, inf when the a priori bound is invalid
    double apriori = inf;
    bool accepted = false;   // residual < threshold
    bool fit_failed = false;
    Index tau = 0;           // generator width of r_m(A) after compression
    Index peak_tau = 0;
    double wall_ms = 0.0;
    double rel_err = std::numeric_limits<double>::quiet_NaN();
};

struct NewtonStep {
    int k = 0;
    double mu = 1.0;
    int phase = 1;
    double residual = 0.0;  // |I - M_k|
};

struct NewtonReport {
    std::vector<NewtonStep> steps;
    double final_residual = 0.0;
};

struct ScalingInfo {
    int ell = 0;
    int k = 0;
    double gamma_prime = 0.0;
    double c = 0.0, d = 0.0;  // bounds of A^{1/2^ell}
    std::vector<NewtonReport> newton;
};

struct MatFunResult {
    MatValue approximation;
    int m = 0;
    Rep rep = Rep::PFD;
    bool not_triggered = false;
    std::vector<DegreeRecord> history;
    ScalingInfo scaling;
};

struct AutoDegreeOptions {
    Rep rep = Rep::PFD;
    int m_max = 30;
    /// Keep evaluating degrees after the stopping rule fires, for experiment tables.
    bool run_to_m_max = false;
    /// Replace [c,d] by [c/2, 2d] before building the geometry.
    bool enlarge = false;
    double newton_tol = 0.0;  // 0 selects 10 n eps d/c
    std::function<void(DegreeRecord&, const MatValue&)> on_degree;
};

inline Geometry matrix_geometry(const MarkovSpec& spec, double c, double d, bool enlarge)
{
    if (enlarge) {
        c /= 2.0;
        d *= 2.0;
    }
    return build_geometry(spec.alpha, spec.beta, c, d);
}

/// Increase m until residual_sqrt reaches 40 rho^2m/(1 - 2 rho^2m)^2 and keep the previous degree.
inline MatFunResult auto_degree(const MarkovSpec& spec, const MatArg& A, const Geometry& g,
                                const AutoDegreeOptions& opt = {})
{
    if (opt.m_max < 1)
        throw DomainError("m_max must be positive");
    MarkovSpec nu = worst_case_spec(g.alpha, g.beta);
    MatFunResult res;
    res.rep = opt.rep;
    bool stopped = false;
    for (int m = 1; m <= opt.m_max; ++m) {
        auto t0 = std::chrono::steady_clock::now();
        DegreeRecord rec;
        rec.m = m;
        rec.threshold = stopping_threshold(g, m);
        try {
            rec.apriori = apriori_bound(g, m);
        } catch (const BoundInvalid&) {
            rec.apriori = inf;
        }
        std::optional<MatValue> F;
        try {
            NodeSet ns = optimal_nodes(g, m);
            auto r_mu = fit_interpolant(opt.rep, spec, ns);
            auto r_nu = fit_interpolant(opt.rep, nu, ns);
            EvalStats st;
            F = eval_rational_at_matrix(r_mu, A, &st);
            rec.residual = detail::with_ops(A.value, A.solver, &st, [&](const auto& ops, const auto& x) {
                detail::check_poles(r_nu, A.c, A.d);
                auto R = detail::eval_rational(ops, r_nu, x);
                return detail::residual_sqrt(ops, x, R, g);
            });
            rec.tau = generator_width(*F);
            rec.peak_tau = st.peak_tau;
            rec.accepted = rec.residual < rec.threshold;
        } catch (const NumericalError&) {
            rec.fit_failed = true;
            rec.residual = inf;
            rec.accepted = false;
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (F && opt.on_degree)
            opt.on_degree(rec, *F);
        res.history.push_back(rec);
        if (!stopped) {
            if (rec.accepted) {
                res.m = m;
                res.approximation = std::move(*F);
            } else {
                stopped = true;
                if (m == 1)
                    throw DegreeUnavailable("stopping rule fires at m = 1");
                if (!opt.run_to_m_max)
                    break;
            }
        }
    }
    if (!stopped)
        res.not_triggered = true;
    return res;
}

namespace detail {

/// Rutishauser parameters: mu_0 = (cd)^{-1/4}, mu_1 = sqrt(2 (cd)^{1/4}/(sqrt c + sqrt d)),
/// mu_{k+1} = sqrt(2 mu_k/(1 + mu_k^2)).
inline double newton_mu(int k, double prev, double c, double d)
{
    if (k == 0)
        return 1.0 / std::sqrt(std::sqrt(c * d));
    if (k == 1)
        return std::sqrt(2.0 * std::sqrt(std::sqrt(c * d)) / (std::sqrt(c) + std::sqrt(d)));
    return std::sqrt(2.0 * prev / (1.0 + prev * prev));
}

template <typename Ops>
typename Ops::M sqrt_db(const Ops& ops, const typename Ops::M& B, double c, double d, double tol,
                        NewtonReport& rep)
{
    constexpr int max_iter = 25;
    constexpr int phase2_budget = 5;
    auto X = B, M = B;
    const auto I = ops.eye();
    double mu = 1.0;
    int phase = 1, phase2_steps = 0;
    for (int k = 0;; ++k) {
        double r = ops.norm(ops.shift(M, 1.0));
        if (phase == 1) {
            mu = newton_mu(k, mu, c, d);
            double m4 = mu * mu * mu * mu;
            if (k >= 1 && (1.0 - m4) / m4 <= 1e-3) {
                phase = 2;
                mu = 1.0;
            }
        }
        rep.steps.push_back({k, mu, phase, r});
        rep.final_residual = r;
        if (!std::isfinite(r))
            throw NoConvergence("square root iteration diverged");
        if (r <= tol || (phase == 2 && phase2_steps >= phase2_budget))
            return X;
        if (k >= max_iter)
            throw NoConvergence("square root iteration exceeded 25 steps");
        if (phase == 2)
            ++phase2_steps;
        auto Minv = ops.inv(M);
        double mu2 = mu * mu;
        auto T = ops.add(I, ops.scale(1.0 / mu2, Minv));
        X = ops.scale(0.5 * mu, ops.mul(T, X));
        M = ops.scale(0.25, ops.add(ops.add(ops.scale(2.0, I), ops.scale(mu2, M)), ops.scale(1.0 / mu2, Minv)));
    }
}

}  // namespace detail

inline double default_newton_tol(Index n, double c, double d)
{
    return 10.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * (d / c);
}

/// Square root of an SPD matrix with spectrum in [c,d] by the two-phase scaled product-form
/// Denman-Beavers iteration. The result carries the bounds [sqrt c, sqrt d].
inline MatArg sqrt_db_newton(const MatArg& B, double c, double d, double tol = 0.0, NewtonReport* report = nullptr)
{
    if (!(c > 0.0 && d >= c))
        throw InvalidInterval("need 0 < c <= d");
    if (tol <= 0.0)
        tol = default_newton_tol(B.n(), c, d);
    NewtonReport rep;
    MatArg out = B;
    out.c = std::sqrt(c);
    out.d = std::sqrt(d);
    out.value = detail::with_ops(B.value, B.solver, nullptr, [&](const auto& ops, const auto& x) -> MatValue {
        return detail::sqrt_db(ops, x, c, d, tol, rep);
    });
    if (report)
        *report = std::move(rep);
    return out;
}

/// Smallest l >= 0 with (d/c)^{1/2^l} <= 10.
inline int choose_ell(double c, double d)
{
    if (!(c > 0.0 && d >= c))
        throw InvalidInterval("need 0 < c <= d");
    int ell = 0;
    double r = d / c;
    while (r > 10.0) {
        r = std::sqrt(r);
        ++ell;
    }
    return ell;
}

struct PowerSplit {
    int k = 0;
    double gamma_prime = 0.0;
};

/// 2^l gamma = k + gamma' with k integer and gamma' in [-1, 0).
inline PowerSplit split_power(double gamma, int ell)
{
    double x = std::ldexp(gamma, ell);
    double k = std::floor(x) + 1.0;
    return {static_cast<int>(k), x - k};
}

namespace detail {

inline MatArg repeated_sqrt(const MatArg& A, int ell, double tol, ScalingInfo& info)
{
    MatArg Aj = A;
    for (int j = 0; j < ell; ++j) {
        NewtonReport rep;
        Aj = sqrt_db_newton(Aj, Aj.c, Aj.d, tol, &rep);
        info.newton.push_back(std::move(rep));
    }
    info.ell = ell;
    info.c = Aj.c;
    info.d = Aj.d;
    return Aj;
}

}  // namespace detail

/// log(A) = 2^l (A_l - I) r_m(A_l), A_l = A^{1/2^l}, with r_m interpolating log(z)/(z-1).
inline MatFunResult log_via_scaling(const MatArg& A, const AutoDegreeOptions& opt = {})
{
    MatFunResult res;
    int ell = choose_ell(A.c, A.d);
    MatArg Al = detail::repeated_sqrt(A, ell, opt.newton_tol, res.scaling);
    MarkovSpec spec = log_spec();
    Geometry g = matrix_geometry(spec, Al.c, Al.d, opt.enlarge);
    AutoDegreeOptions o = opt;
    double fac = std::ldexp(1.0, ell);
    if (opt.on_degree)
        o.on_degree = [&](DegreeRecord& rec, const MatValue& R) {
            MatValue L = detail::with_ops(Al.value, Al.solver, nullptr, [&](const auto& ops, const auto& x) -> MatValue {
                using M = std::decay_t<decltype(x)>;
                return ops.scale(fac, ops.mul(ops.shift(x, 1.0), std::get<M>(R)));
            });
            opt.on_degree(rec, L);
        };
    MatFunResult inner = auto_degree(spec, Al, g, o);
    res.m = inner.m;
    res.rep = inner.rep;
    res.not_triggered = inner.not_triggered;
    res.history = std::move(inner.history);
    res.approximation = detail::with_ops(Al.value, Al.solver, nullptr, [&](const auto& ops, const auto& x) -> MatValue {
        using M = std::decay_t<decltype(x)>;
        return ops.scale(fac, ops.mul(ops.shift(x, 1.0), std::get<M>(inner.approximation)));
    });
    return res;
}

/// A^gamma = r_m(A_l) A_l^k with 2^l gamma = k + gamma'. With scaled = false, l = 0.
inline MatFunResult frac_power(const MatArg& A, double gamma, bool scaled = true, const AutoDegreeOptions& opt = {})
{
    if (!std::isfinite(gamma))
        throw DomainError("exponent must be finite");
    MatFunResult res;
    res.rep = opt.rep;
    auto identity = [&]() -> MatValue {
        return detail::with_ops(A.value, A.solver, nullptr,
                                [&](const auto& ops, const auto&) -> MatValue { return ops.eye(); });
    };
    if (gamma == 0.0) {
        res.approximation = identity();
        return res;
    }
    int ell = scaled ? choose_ell(A.c, A.d) : 0;
    double x = std::ldexp(gamma, ell);
    if (x == std::floor(x)) {
        // integer power of the scaled matrix, no interpolation needed
        MatArg Al = detail::repeated_sqrt(A, ell, opt.newton_tol, res.scaling);
        res.scaling.k = static_cast<int>(x);
        res.approximation = detail::with_ops(Al.value, Al.solver, nullptr, [&](const auto& ops, const auto& a) -> MatValue {
            return detail::int_power(ops, a, static_cast<int>(x));
        });
        return res;
    }
    PowerSplit sp = split_power(gamma, ell);
    MatArg Al = detail::repeated_sqrt(A, ell, opt.newton_tol, res.scaling);
    res.scaling.k = sp.k;
    res.scaling.gamma_prime = sp.gamma_prime;
    MarkovSpec spec = power_spec(sp.gamma_prime);
    Geometry g = matrix_geometry(spec, Al.c, Al.d, opt.enlarge);
    auto times_power = [&](const MatValue& R) -> MatValue {
        return detail::with_ops(Al.value, Al.solver, nullptr, [&](const auto& ops, const auto& a) -> MatValue {
            using M = std::decay_t<decltype(a)>;
            const M& r = std::get<M>(R);
            if (sp.k == 0)
                return r;
            return ops.mul(r, detail::int_power(ops, a, sp.k));
        });
    };
    AutoDegreeOptions o = opt;
    if (opt.on_degree)
        o.on_degree = [&](DegreeRecord& rec, const MatValue& R) { opt.on_degree(rec, times_power(R)); };
    MatFunResult inner = auto_degree(spec, Al, g, o);
    res.m = inner.m;
    res.not_triggered = inner.not_triggered;
    res.history = std::move(inner.history);
    res.approximation = times_power(inner.approximation);
    return res;
}

/// Dense reference values computed from the symmetric eigendecomposition.
namespace oracle {

inline MatrixXd function_of(const MatrixXd& A, const std::function<double(double)>& f)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()));
    VectorXd fl = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().transpose();
}

/// |I - R F^{-1}|_2
inline double relative_error(const MatrixXd& R, const MatrixXd& F)
{
    Eigen::PartialPivLU<MatrixXd> lu(F.transpose());
    MatrixXd E = lu.solve(R.transpose()).transpose();
    E.diagonal().array() -= 1.0;
    return detail::dense_norm2(E);
}

/// |R - F|_2 / |F|_2
inline double normwise_error(const MatrixXd& R, const MatrixXd& F)
{
    return detail::dense_norm2(R - F) / detail::dense_norm2(F);
}

inline std::pair<double, double> extreme_eigenvalues(const MatrixXd& A)
{
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
    return {es.eigenvalues()[0], es.eigenvalues()[A.rows() - 1]};
}

}  // namespace oracle

}  // namespace marktop
