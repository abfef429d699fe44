#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial loop that
// serves as the reference, and an OpenMP version used by the library. Reductions
// in the OpenMP path are blocked with a fixed block size so results do not depend
// on the thread count.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace robinlap {

using cplx = std::complex<double>;

enum class Exec { serial, parallel };

namespace kernels {

inline constexpr std::size_t reduction_block = 4096;

namespace serial {
void multiply(std::span<cplx> x, std::span<const cplx> factor);
void multiply(std::span<cplx> x, std::span<const double> factor);
void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double norm_sq(std::span<const cplx> x);
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);
} // namespace serial

namespace parallel {
void multiply(std::span<cplx> x, std::span<const cplx> factor);
void multiply(std::span<cplx> x, std::span<const double> factor);
void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y);
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double norm_sq(std::span<const cplx> x);
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);
} // namespace parallel

inline void multiply(std::span<cplx> x, std::span<const cplx> f) { parallel::multiply(x, f); }
inline void multiply(std::span<cplx> x, std::span<const double> f) { parallel::multiply(x, f); }
inline void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) { parallel::axpy(a, x, y); }
/// sum_i a_i * conj(b_i)
inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) { return parallel::dot(a, b); }
inline double norm_sq(std::span<const cplx> x) { return parallel::norm_sq(x); }

inline void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                           Exec exec = Exec::parallel)
{
    if (exec == Exec::serial)
        serial::for_each_index(count, body);
    else
        parallel::for_each_index(count, body);
}

int max_threads() noexcept;

} // namespace kernels
} // namespace robinlap
