#include "robinlap/kernels.hpp"

#include <cassert>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace robinlap::kernels {

namespace serial {

void multiply(std::span<cplx> x, std::span<const cplx> factor)
{
    assert(x.size() == factor.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] *= factor[i];
}

void multiply(std::span<cplx> x, std::span<const double> factor)
{
    assert(x.size() == factor.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] *= factor[i];
}

void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y)
{
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += a * x[i];
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b)
{
    assert(a.size() == b.size());
    cplx sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * std::conj(b[i]);
    return sum;
}

double norm_sq(std::span<const cplx> x)
{
    double sum = 0.0;
    for (const auto& v : x)
        sum += std::norm(v);
    return sum;
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body)
{
    for (std::size_t i = 0; i < count; ++i)
        body(i);
}

} // namespace serial

namespace parallel {

void multiply(std::span<cplx> x, std::span<const cplx> factor)
{
    assert(x.size() == factor.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        x[i] *= factor[i];
}

void multiply(std::span<cplx> x, std::span<const double> factor)
{
    assert(x.size() == factor.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        x[i] *= factor[i];
}

void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y)
{
    assert(x.size() == y.size());
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b)
{
    assert(a.size() == b.size());
    const std::size_t blocks = (a.size() + reduction_block - 1) / reduction_block;
    std::vector<cplx> partial(blocks);
    const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < nb; ++k) {
        const std::size_t lo = static_cast<std::size_t>(k) * reduction_block;
        const std::size_t hi = std::min(a.size(), lo + reduction_block);
        cplx s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += a[i] * std::conj(b[i]);
        partial[static_cast<std::size_t>(k)] = s;
    }
    cplx sum = 0.0;
    for (const auto& s : partial)
        sum += s;
    return sum;
}

double norm_sq(std::span<const cplx> x)
{
    const std::size_t blocks = (x.size() + reduction_block - 1) / reduction_block;
    std::vector<double> partial(blocks);
    const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < nb; ++k) {
        const std::size_t lo = static_cast<std::size_t>(k) * reduction_block;
        const std::size_t hi = std::min(x.size(), lo + reduction_block);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += std::norm(x[i]);
        partial[static_cast<std::size_t>(k)] = s;
    }
    double sum = 0.0;
    for (double s : partial)
        sum += s;
    return sum;
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body)
{
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        body(static_cast<std::size_t>(i));
}

} // namespace parallel

int max_threads() noexcept
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace robinlap::kernels
