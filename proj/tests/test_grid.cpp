#include "robinlap/grid.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

using namespace robinlap;
using robinlap::testing::Rng;

TEST_CASE("boundary grid construction")
{
    SUBCASE("integer frequencies when L = 2 pi")
    {
        BoundaryGrid g(2, 8, 2.0 * pi);
        std::set<int> ks;
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(g.frequency(i, 0) == doctest::Approx(g.frequency_index(i, 0)).epsilon(1e-15));
            ks.insert(g.frequency_index(i, 0));
        }
        CHECK(ks == std::set<int>{-4, -3, -2, -1, 0, 1, 2, 3});
    }
    SUBCASE("d = 3 node count and frequency spacing")
    {
        BoundaryGrid g(3, 4, 1.0);
        CHECK(g.size() == 16);
        CHECK(g.frequency(4, 0) == doctest::Approx(2.0 * pi));
        CHECK(g.frequency(1, 1) == doctest::Approx(2.0 * pi));
    }
    SUBCASE("errors")
    {
        auto kind_of = [](auto&& f) {
            try {
                f();
            } catch (const Error& e) {
                return e.kind();
            }
            return ErrorKind::io_error;
        };
        CHECK(kind_of([] { BoundaryGrid(2, 6, 1.0); }) == ErrorKind::invalid_size);
        CHECK(kind_of([] { BoundaryGrid(2, 2, 1.0); }) == ErrorKind::invalid_size);
        CHECK(kind_of([] { BoundaryGrid(4, 8, 1.0); }) == ErrorKind::invalid_dimension);
        CHECK(kind_of([] { BoundaryGrid(2, 8, -1.0); }) == ErrorKind::invalid_argument);
        CHECK(kind_of([] { SlabGrid(BoundaryGrid(2, 8, 1.0), 1.0, 3); }) == ErrorKind::invalid_size);
    }
    SUBCASE("nodes are cell centred")
    {
        BoundaryGrid g(2, 8, 2.0);
        CHECK(g.node(0, 0) == doctest::Approx(-1.0 + 0.125));
        CHECK(g.node(7, 0) == doctest::Approx(1.0 - 0.125));
    }
}

TEST_CASE("dft")
{
    BoundaryGrid g(2, 16, 3.0);
    SUBCASE("constant puts all mass on the zero frequency")
    {
        BoundaryFunction one(g, cvec(g.size(), 1.0));
        const auto f = dft(one, Direction::forward);
        CHECK(f.space == Space::frequencies);
        for (std::size_t i = 1; i < g.size(); ++i)
            CHECK(std::abs(f.values[i]) < 1e-13);
        CHECK(std::abs(f.values[0]) > 0.1);
    }
    SUBCASE("pure mode has one coefficient")
    {
        const std::size_t target = 3;
        const double xi0 = g.frequency(target, 0);
        auto mode = sample_boundary(g, [&](std::span<const double> x) { return std::exp(cplx(0, xi0 * x[0])); });
        const auto f = dft(mode, Direction::forward);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (i != target)
                CHECK(std::abs(f.values[i]) < 1e-12);
    }
    SUBCASE("Parseval and round trip on random functions")
    {
        Rng rng(11);
        for (int d : {2, 3}) {
            BoundaryGrid gd(d, d == 2 ? 64 : 16, 5.0);
            for (int trial = 0; trial < 100; ++trial) {
                auto u = robinlap::testing::random_boundary(gd, rng);
                auto f = dft(u, Direction::forward);
                auto back = dft(f, Direction::inverse);
                CHECK(robinlap::testing::rel_diff(back.values, u.values) <= 1e-13);
                const double nu = norm(u, Norm::L2());
                const double nf = std::sqrt(kernels::norm_sq(f.values) * gd.frequency_weight());
                CHECK(std::abs(nf - nu) <= 1e-12 * nu);
            }
        }
    }
    SUBCASE("direction mismatch is rejected")
    {
        BoundaryFunction u(g);
        CHECK_THROWS_AS(dft(u, Direction::inverse), Error);
    }
}

TEST_CASE("slab transform round trip and cosine basis")
{
    Rng rng(5);
    SlabGrid s(BoundaryGrid(2, 16, 4.0), 1.5, 8);
    for (int trial = 0; trial < 20; ++trial) {
        auto u = robinlap::testing::random_slab(s, rng);
        cvec c(s.size()), back(s.size()), cs(s.size());
        s.to_spectral(u.values, c);
        s.to_spectral(u.values, cs, Exec::serial);
        CHECK(robinlap::testing::rel_diff(cs, c) <= 1e-15);
        s.from_spectral(c, back);
        CHECK(robinlap::testing::rel_diff(back, u.values) <= 1e-13);
    }
    // e_1 sampled at the levels maps to a single coefficient of size 1/sqrt(volume)
    auto f = sample_slab(s, [&](std::span<const double>, double z) {
        return s.cosine_norm(1) * std::cos(pi * z / s.height());
    });
    cvec c(s.size());
    s.to_spectral(f.values, c);
    const std::size_t nb = s.boundary().size();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double expect = (i == nb) ? s.boundary().volume() / std::sqrt(2.0 * pi) : 0.0;
        CHECK(std::abs(c[i] - expect) < 1e-12);
    }
}

TEST_CASE("norms")
{
    Rng rng(7);
    BoundaryGrid g(2, 32, 6.0);
    const double vol = g.volume();
    BoundaryFunction one(g, cvec(g.size(), 1.0));
    CHECK(norm(one, Norm::L2()) == doctest::Approx(std::sqrt(vol)).epsilon(1e-14));
    for (double s : {-1.0, 0.3, 2.5})
        CHECK(norm(one, Norm::Hs(s)) == doctest::Approx(std::sqrt(vol)).epsilon(1e-13));
    CHECK(norm(one, Norm::Lp(3.0)) == doctest::Approx(std::cbrt(vol)).epsilon(1e-13));
    CHECK_THROWS_AS(norm(one, Norm::Lp(0.5)), Error);

    for (int trial = 0; trial < 50; ++trial) {
        auto u = robinlap::testing::random_boundary(g, rng);
        const double l2 = norm(u, Norm::L2());
        CHECK(std::abs(norm(u, Norm::Hs(0.0)) - l2) <= 1e-12 * l2);
        CHECK(std::abs(norm(u, Norm::Lp(2.0)) - l2) <= 1e-12 * l2);
        double prev = 0.0;
        for (double s = -2.0; s <= 2.0; s += 0.25) {
            const double hs = norm(u, Norm::Hs(s));
            CHECK(hs >= prev);
            prev = hs;
        }
    }
    SlabGrid sg(g, 1.0, 4);
    SlabFunction sone(sg, cvec(sg.size(), 1.0));
    CHECK(norm(sone, Norm::L2()) == doctest::Approx(std::sqrt(vol)).epsilon(1e-14));
    CHECK_THROWS_AS(norm(sone, Norm::Hs(1.0)), Error);
}

TEST_CASE("inner products")
{
    Rng rng(8);
    BoundaryGrid g(3, 8, 2.0);
    auto a = robinlap::testing::random_boundary(g, rng);
    auto b = robinlap::testing::random_boundary(g, rng);
    const cplx ab = inner(a, b);
    const cplx ba = inner(b, a);
    CHECK(std::abs(ab - std::conj(ba)) < 1e-12 * std::abs(ab));
    CHECK(inner(a, a).real() == doctest::Approx(std::pow(norm(a, Norm::L2()), 2)).epsilon(1e-13));
    BoundaryGrid other(3, 8, 2.5);
    CHECK_THROWS_AS(inner(a, BoundaryFunction(other)), Error);
}

TEST_CASE("gradient norm")
{
    SUBCASE("constant")
    {
        SlabGrid s(BoundaryGrid(2, 8, 2.0), 1.0, 8);
        SlabFunction one(s, cvec(s.size(), 1.0));
        CHECK(grad_norm_sq(one) < 1e-24);
    }
    SUBCASE("first cosine mode, L = 2 pi, H = pi")
    {
        SlabGrid s(BoundaryGrid(2, 16, 2.0 * pi), pi, 16);
        auto f = sample_slab(s, [&](std::span<const double>, double z) { return std::cos(pi * z / s.height()); });
        // int_0^{2 pi} int_0^{pi} sin^2(z) dz dx = 2 pi * pi / 2
        CHECK(grad_norm_sq(f) == doctest::Approx(pi * pi).epsilon(1e-12));
    }
    SUBCASE("boundary mode agrees with a finite-difference gradient")
    {
        SlabGrid s(BoundaryGrid(2, 64, 2.0 * pi), 1.0, 8);
        auto f = sample_slab(s, [](std::span<const double> x, double) { return std::exp(cplx(0, x[0])); });
        const double g2 = grad_norm_sq(f);
        CHECK(g2 == doctest::Approx(std::pow(norm(f, Norm::L2()), 2)).epsilon(1e-12));
        // centred differences on the periodic lattice, O(h^2)
        const auto& b = s.boundary();
        const double h = b.spacing();
        double fd = 0.0;
        for (int m = 0; m < s.levels(); ++m)
            for (std::size_t j = 0; j < b.size(); ++j) {
                const std::size_t row = static_cast<std::size_t>(m) * b.size();
                const cplx d = (f.values[row + (j + 1) % b.size()] - f.values[row + (j + b.size() - 1) % b.size()]) /
                               (2.0 * h);
                fd += std::norm(d) * s.cell_volume();
            }
        CHECK(fd == doctest::Approx(g2).epsilon(5e-3));
    }
}

TEST_CASE("serialization round trip")
{
    Rng rng(9);
    BoundaryGrid g(2, 16, 1.0);
    auto u = robinlap::testing::random_boundary(g, rng);
    const auto dir = std::filesystem::temp_directory_path() / "robinlap_test_grid";
    std::filesystem::create_directories(dir);
    write_csv(dir / "u.csv", u.values);
    write_binary(dir / "u.bin", u.values);
    const auto c = read_csv(dir / "u.csv", g);
    const auto b = read_binary(dir / "u.bin", g);
    CHECK(c.values == u.values);
    CHECK(b.values == u.values);
    CHECK(std::filesystem::file_size(dir / "u.bin") == 16 * 16);
    CHECK_THROWS_AS(read_csv(dir / "missing.csv"), Error);
    std::filesystem::remove_all(dir);
}
