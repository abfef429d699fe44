#include "robinlap/fd_oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>

using namespace robinlap;
using robinlap::testing::Rng;

namespace {

RobinCoefficient constant(const BoundaryGrid& g, double c)
{
    return RobinCoefficient(g, std::vector<double>(g.size(), c), 1e300);
}

// Smooth right-hand side with a handful of tangential and normal modes.
SlabFunction smooth_rhs(const SlabGrid& s)
{
    return sample_slab(s, [&](std::span<const double> x, double z) {
        const double H = s.height();
        return cplx(std::exp(-x[0] * x[0]) * (1.0 + std::cos(pi * z / H)), 0.3 * std::cos(2.0 * pi * z / H));
    });
}

double rel_error(const SlabFunction& a, const SlabFunction& b)
{
    return testing::rel_diff(a.values, b.values);
}

cplx weighted(const FdRobinOperator& op, std::span<const cplx> u, std::span<const cplx> v)
{
    const std::size_t nb = op.slab().boundary().size();
    cplx s = 0.0;
    for (int j = 0; j < op.vertices(); ++j)
        for (std::size_t b = 0; b < nb; ++b) {
            const std::size_t i = static_cast<std::size_t>(j) * nb + b;
            s += op.mass(j) * u[i] * std::conj(v[i]);
        }
    return s;
}

} // namespace

TEST_CASE("alpha = 0 reproduces the Neumann resolvent at second order")
{
    const BoundaryGrid g(2, 32, 8.0);
    std::vector<double> errs;
    for (int nd : {16, 32, 64}) {
        const SlabGrid s(g, 2.0, nd);
        const HalfspaceModel model{s, Geometry::slab};
        const auto h = smooth_rhs(s);
        const auto exact = neumann_resolvent(-1.0, h, model).sample();
        const auto fd = fd_robin_oracle(constant(g, 0.0), s, -1.0, h);
        errs.push_back(rel_error(fd.u, exact));
    }
    for (std::size_t i = 1; i < errs.size(); ++i)
        CHECK(std::log2(errs[i - 1] / errs[i]) >= 1.9);
    CHECK(errs.back() <= 1e-3);
}

TEST_CASE("alpha = 1 single mode converges to the two-point closed form")
{
    // -u'' + w^2 u = cos(k z), u'(H) = 0, -u'(0) = a u(0)
    const double L = 2.0 * pi, H = 1.5, a = 1.0;
    const cplx lambda(-2.0, 0.0);
    const BoundaryGrid g(2, 8, L);
    const int mode = 1;
    const double xi = 2.0 * pi * mode / L;
    const double k = pi / H;
    const cplx w = std::sqrt(xi * xi - lambda);
    const cplx bcoef = a / ((k * k + w * w) * (w * std::sinh(w * H) - a * std::cosh(w * H)));
    std::vector<double> errs;
    for (int nd : {16, 32, 64, 128}) {
        const SlabGrid s(g, H, nd);
        const auto h = sample_slab(s, [&](std::span<const double> x, double z) {
            return std::cos(k * z) * std::exp(cplx(0.0, xi * x[0]));
        });
        const auto exact = sample_slab(s, [&](std::span<const double> x, double z) {
            return (std::cos(k * z) / (k * k + w * w) + bcoef * std::cosh(w * (H - z))) * std::exp(cplx(0.0, xi * x[0]));
        });
        errs.push_back(rel_error(fd_robin_oracle(constant(g, a), s, lambda, h).u, exact));
    }
    for (std::size_t i = 1; i < errs.size(); ++i)
        CHECK(errs[i - 1] / errs[i] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("oracle is self-adjoint in the lumped inner product")
{
    Rng rng(41);
    const BoundaryGrid g(2, 32, 8.0);
    const SlabGrid s(g, 2.0, 24);
    const auto alpha = load_coefficient("|x|^(-1/4) * ball(1)", g, 3.0);
    const FdRobinOperator op(alpha, s);
    for (int trial = 0; trial < 5; ++trial) {
        const cvec h = rng.cvector(op.size()), f = rng.cvector(op.size());
        const cvec sh = op.solve(-8.0, h).solution, sf = op.solve(-8.0, f).solution;
        const cplx lhs = weighted(op, sh, f), rhs = weighted(op, h, sf);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));

        const cplx z(-3.0, 2.0);
        const cvec zh = op.solve(z, h).solution, zf = op.solve(std::conj(z), f).solution;
        CHECK(std::abs(weighted(op, zh, f) - weighted(op, h, zf)) <= 1e-10 * std::abs(weighted(op, zh, f)));
    }
}

TEST_CASE("form operator is positive at the certified lambda0")
{
    const BoundaryGrid g(2, 16, 4.0);
    const SlabGrid s(g, 1.0, 12);
    for (const char* expr : {"1", "1 + 0.5 * cos(2 * pi * x1)", "|x|^(-1/4) * ball(1)"}) {
        const auto alpha = load_coefficient(expr, g, 3.0);
        const auto l0 = find_lambda0(alpha, WeylGeometry::slab(1.0));
        const FdRobinOperator op(alpha, s);
        Eigen::LLT<Eigen::MatrixXd> llt(op.dense(l0.lambda0));
        CHECK_MESSAGE(llt.info() == Eigen::Success, expr);
        const Eigen::MatrixXd a = op.dense(0.0);
        CHECK((a - a.transpose()).norm() <= 1e-12 * a.norm());
    }
    // a strong attracting coefficient makes the shifted form indefinite at lambda = -1
    const auto strong = constant(g, 6.0);
    const FdRobinOperator op(strong, s);
    Rng rng(2);
    bool threw = false;
    try {
        op.solve(-1.0, rng.cvector(op.size()));
    } catch (const SolverError& e) {
        threw = e.kind() == ErrorKind::indefinite_system;
    }
    CHECK(threw);
}

TEST_CASE("finite-difference tangential option agrees at second order")
{
    std::vector<double> errs;
    for (int n : {32, 64, 128}) {
        const BoundaryGrid g(2, n, 8.0);
        const SlabGrid s(g, 2.0, 16);
        const auto h = smooth_rhs(s);
        const auto alpha = constant(g, 0.5);
        const auto spec = fd_robin_oracle(alpha, s, -1.0, h);
        const auto fd = fd_robin_oracle(alpha, s, -1.0, h, FdOptions{Tangential::finite_difference});
        errs.push_back(rel_error(fd.u, spec.u));
    }
    CHECK(errs[0] / errs[1] >= 3.5);
    CHECK(errs[1] / errs[2] >= 3.5);
}

TEST_CASE("serial and parallel oracle runs agree bitwise")
{
    const BoundaryGrid g(2, 32, 8.0);
    const SlabGrid s(g, 2.0, 16);
    const auto alpha = load_coefficient("1 + 0.5 * cos(2 * pi * x1)", g, 3.0);
    const auto h = smooth_rhs(s);
    FdOptions serial;
    serial.exec = Exec::serial;
    const auto a = fd_robin_oracle(alpha, s, -2.0, h, serial);
    const auto b = fd_robin_oracle(alpha, s, -2.0, h);
    CHECK(a.u.values == b.u.values);
}
