#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

#include <Eigen/Dense>

namespace marktop::fft {

namespace detail {

struct PlanCache {
    std::mutex mu;
    std::map<std::pair<int, int>, fftw_plan> plans;

    ~PlanCache()
    {
        for (auto& kv : plans)
            fftw_destroy_plan(kv.second);
    }
};

inline PlanCache& cache()
{
    static PlanCache c;
    return c;
}

/// Plans are created once per (size, direction) and executed through the new-array interface,
/// which is thread-safe; only planning needs the lock.
inline fftw_plan plan(int n, int sign)
{
    auto& c = cache();
    std::lock_guard<std::mutex> lock(c.mu);
    auto key = std::make_pair(n, sign);
    auto it = c.plans.find(key);
    if (it != c.plans.end())
        return it->second;
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    c.plans.emplace(key, p);
    return p;
}

inline void run(Eigen::VectorXcd& x, int sign)
{
    const int n = static_cast<int>(x.size());
    Eigen::VectorXcd y(n);
    fftw_execute_dft(plan(n, sign), reinterpret_cast<fftw_complex*>(x.data()),
                     reinterpret_cast<fftw_complex*>(y.data()));
    x.swap(y);
}

}  // namespace detail

/// Unnormalized forward transform, sum_k x_k e^{-2 pi i jk/n}.
inline void forward(Eigen::VectorXcd& x) { detail::run(x, FFTW_FORWARD); }

/// Inverse transform including the 1/n factor.
inline void inverse(Eigen::VectorXcd& x)
{
    detail::run(x, FFTW_BACKWARD);
    x /= static_cast<double>(x.size());
}

}  // namespace marktop::fft
