#include "robinlap/iterative.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace robinlap;
using robinlap::testing::Rng;

namespace {

LinearMap as_map(const Eigen::MatrixXcd& m)
{
    return [m](const cvec& x) {
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        Eigen::VectorXcd y = m * xv;
        return cvec(y.data(), y.data() + y.size());
    };
}

Eigen::VectorXcd as_eigen(const cvec& x)
{
    return Eigen::Map<const Eigen::VectorXcd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

Eigen::MatrixXcd random_matrix(Rng& rng, int n, double scale)
{
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = rng.cnormal() * scale;
    return m;
}

} // namespace

TEST_CASE("Neumann series")
{
    Rng rng(41);
    const int n = 30;
    Eigen::MatrixXcd k = random_matrix(rng, n, 1.0);
    k *= 0.5 / k.jacobiSvd().singularValues()(0);
    const cvec b = rng.cvector(n);
    const auto res = neumann_series(as_map(k), b, {});
    const Eigen::VectorXcd exact = (Eigen::MatrixXcd::Identity(n, n) - k).partialPivLu().solve(as_eigen(b));
    CHECK((as_eigen(res.solution) - exact).norm() <= 1e-9 * exact.norm());
    CHECK(res.residual <= 1e-10);
    for (std::size_t i = 1; i < res.history.size(); ++i)
        CHECK(res.history[i] <= 0.5 * res.history[i - 1] * (1.0 + 1e-9));

    const auto zero = neumann_series(as_map(k), cvec(n, 0.0), {});
    CHECK(kernels::norm_sq(zero.solution) == 0.0);

    Eigen::MatrixXcd big = 1.5 * Eigen::MatrixXcd::Identity(n, n);
    try {
        neumann_series(as_map(big), b, {1e-10, 50, 0});
        CHECK(false);
    } catch (const SolverError& e) {
        CHECK(e.kind() == ErrorKind::non_convergence);
        CHECK(e.value() > 1.0);
    }
}

TEST_CASE("GMRES")
{
    Rng rng(42);
    for (int n : {5, 40, 120}) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) + random_matrix(rng, n, 0.4 / std::sqrt(n));
        const cvec b = rng.cvector(static_cast<std::size_t>(n));
        for (int restart : {3, 20, 200}) {
            const auto res = gmres(as_map(a), b, {1e-11, 2000, restart});
            const Eigen::VectorXcd exact = a.partialPivLu().solve(as_eigen(b));
            CHECK((as_eigen(res.solution) - exact).norm() <= 1e-9 * exact.norm());
            CHECK(res.residual <= 1e-11);
        }
    }
    // non-normal, indefinite but nonsingular
    const int n = 60;
    Eigen::MatrixXcd a = random_matrix(rng, n, 1.0);
    const cvec b = rng.cvector(n);
    const auto res = gmres(as_map(a), b, {1e-10, 5000, 60});
    CHECK(res.residual <= 1e-10);

    CHECK_THROWS_AS(gmres(as_map(a), b, {1e-10, 5, 5}), SolverError);
    CHECK(kernels::norm_sq(gmres(as_map(a), cvec(n, 0.0), {}).solution) == 0.0);
}
