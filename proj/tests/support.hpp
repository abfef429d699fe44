#pragma once

// Seeded generators shared by the property tests.

#include "robinlap/grid.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace robinlap::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal() { return normal_(engine_); }
    cplx cnormal() { return {normal(), normal()}; }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    cvec cvector(std::size_t n)
    {
        cvec v(n);
        for (auto& x : v)
            x = cnormal();
        return v;
    }

    /// Off-cut spectral parameter with |lambda| in [0.1, 50].
    cplx off_cut()
    {
        for (;;) {
            const double r = std::exp(uniform(std::log(0.1), std::log(50.0)));
            const double a = uniform(-pi, pi);
            const cplx z = std::polar(r, a);
            if (!(z.imag() == 0.0 && z.real() >= 0.0))
                return z;
        }
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

inline BoundaryFunction random_boundary(const BoundaryGrid& g, Rng& rng)
{
    return BoundaryFunction(g, rng.cvector(g.size()));
}

inline SlabFunction random_slab(const SlabGrid& g, Rng& rng)
{
    return SlabFunction(g, rng.cvector(g.size()));
}

/// Random field whose mixed coefficients vanish outside |xi| <= kmax_xi and
/// cosine index < kmax_z, so it is exactly representable.
inline SlabFunction band_limited_slab(const SlabGrid& g, Rng& rng, double xi_max, int kz_max)
{
    const auto& b = g.boundary();
    const auto xi2 = b.frequency_sq();
    cvec c(g.size(), 0.0);
    for (int k = 0; k < std::min(kz_max, g.levels()); ++k)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (xi2[j] <= xi_max * xi_max)
                c[static_cast<std::size_t>(k) * b.size() + j] = rng.cnormal();
    SlabFunction f(g);
    g.from_spectral(c, f.values);
    return f;
}

inline double rel_diff(std::span<const cplx> a, std::span<const cplx> b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

} // namespace robinlap::testing
