// Serial reference kernels against their OpenMP counterparts.

#include "robinlap/fd_oracle.hpp"
#include "robinlap/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace robinlap;

namespace {

cvec random_cvec(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    cvec v(n);
    for (auto& x : v)
        x = {normal(rng), normal(rng)};
    return v;
}

template <Exec E>
void bm_multiply(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    cvec x = random_cvec(n, 1);
    const cvec f = random_cvec(n, 2);
    for (auto _ : state) {
        if constexpr (E == Exec::serial)
            kernels::serial::multiply(std::span<cplx>(x), std::span<const cplx>(f));
        else
            kernels::parallel::multiply(std::span<cplx>(x), std::span<const cplx>(f));
        benchmark::DoNotOptimize(x.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Exec E>
void bm_dot(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const cvec a = random_cvec(n, 3), b = random_cvec(n, 4);
    for (auto _ : state) {
        cplx d = E == Exec::serial ? kernels::serial::dot(a, b) : kernels::parallel::dot(a, b);
        benchmark::DoNotOptimize(d);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Exec E>
void bm_slab_transform(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const SlabGrid s(BoundaryGrid(3, n, 8.0), 2.0, n / 2);
    const cvec x = random_cvec(s.size(), 5);
    cvec c(s.size());
    for (auto _ : state) {
        s.to_spectral(x, c, E);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}

template <Exec E>
void bm_fd_matvec(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const BoundaryGrid g(2, n, 8.0);
    const SlabGrid s(g, 2.0, n);
    const auto alpha = load_coefficient("|x|^(-1/4) * ball(1)", g, 3.0);
    FdOptions o;
    o.exec = E;
    const FdRobinOperator op(alpha, s, o);
    const cvec u = random_cvec(op.size(), 6);
    cvec out(op.size());
    for (auto _ : state) {
        op.apply(-4.0, u, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(op.size()));
}

} // namespace

BENCHMARK(bm_multiply<Exec::serial>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_multiply<Exec::parallel>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_dot<Exec::serial>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_dot<Exec::parallel>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_slab_transform<Exec::serial>)->Arg(32)->Arg(64);
BENCHMARK(bm_slab_transform<Exec::parallel>)->Arg(32)->Arg(64);
BENCHMARK(bm_fd_matvec<Exec::serial>)->Arg(128)->Arg(256);
BENCHMARK(bm_fd_matvec<Exec::parallel>)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
