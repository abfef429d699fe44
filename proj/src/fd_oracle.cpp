#include "robinlap/fd_oracle.hpp"

#include <cmath>
#include <sstream>

namespace robinlap {

namespace {

// Bilinear or sesquilinear sum over all entries.
cplx product(std::span<const cplx> a, std::span<const cplx> b, bool hermitian)
{
    if (hermitian)
        return kernels::dot(a, b);
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace

FdRobinOperator::FdRobinOperator(const RobinCoefficient& alpha, const SlabGrid& slab, FdOptions options)
    : slab_(slab), alpha_(alpha.samples()), options_(options)
{
    require_same_grid(alpha.grid(), slab.boundary());
    const auto& g = slab.boundary();
    symbol_.resize(g.size());
    const auto xi2 = g.frequency_sq();
    const double dx = g.spacing();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (options_.tangential == Tangential::spectral) {
            symbol_[i] = xi2[i];
        } else {
            double s = 0.0;
            for (int ax = 0; ax < g.axes(); ++ax) {
                const double sn = std::sin(0.5 * g.frequency(i, ax) * dx);
                s += 4.0 * sn * sn / (dx * dx);
            }
            symbol_[i] = s;
        }
    }
}

std::vector<double> FdRobinOperator::heights() const
{
    std::vector<double> z(static_cast<std::size_t>(vertices()));
    for (int j = 0; j < vertices(); ++j)
        z[static_cast<std::size_t>(j)] = j * dz();
    return z;
}

double FdRobinOperator::mass(int level) const noexcept
{
    return (level == 0 || level == slab_.levels()) ? 0.5 * dz() : dz();
}

void FdRobinOperator::tangential(std::span<const cplx> level, std::span<cplx> out) const
{
    const auto& g = slab_.boundary();
    cvec spec(g.size());
    g.forward(level, spec);
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] *= symbol_[i];
    g.inverse(spec, out);
}

void FdRobinOperator::apply(cplx lambda, std::span<const cplx> u, std::span<cplx> out) const
{
    if (u.size() != size() || out.size() != size())
        throw Error(ErrorKind::shape_mismatch, "fd operator size");
    const std::size_t nb = slab_.boundary().size();
    const int nv = vertices();
    const double idz = 1.0 / dz();
    kernels::for_each_index(
        static_cast<std::size_t>(nv),
        [&](std::size_t js) {
            const int j = static_cast<int>(js);
            const double m = mass(j);
            std::span<cplx> o = out.subspan(js * nb, nb);
            tangential(u.subspan(js * nb, nb), o);
            const cplx* uj = u.data() + js * nb;
            const cplx* um = j > 0 ? uj - nb : nullptr;
            const cplx* up = j + 1 < nv ? uj + nb : nullptr;
            for (std::size_t b = 0; b < nb; ++b) {
                // linear-element stiffness in z: neighbours at distance dz
                cplx s = 0.0;
                if (um)
                    s += (uj[b] - um[b]) * idz;
                if (up)
                    s += (uj[b] - up[b]) * idz;
                o[b] = m * o[b] + s - lambda * m * uj[b];
            }
            if (j == 0)
                for (std::size_t b = 0; b < nb; ++b)
                    o[b] -= alpha_[b] * uj[b];
        },
        options_.exec);
}

void FdRobinOperator::precondition(cplx lambda, std::span<const cplx> r, std::span<cplx> z) const
{
    const auto& g = slab_.boundary();
    const std::size_t nb = g.size();
    const int nv = vertices();
    cvec spec(size());
    kernels::for_each_index(
        static_cast<std::size_t>(nv),
        [&](std::size_t j) { g.forward(r.subspan(j * nb, nb), std::span<cplx>(spec).subspan(j * nb, nb)); },
        options_.exec);
    const double idz = 1.0 / dz();
    // Exact inverse of the operator with alpha dropped; for real lambda below
    // the Neumann spectrum every mode matrix is positive definite.
    kernels::for_each_index(
        nb,
        [&](std::size_t b) {
            const cplx shift = symbol_[b] - lambda;
            std::vector<cplx> c(static_cast<std::size_t>(nv)), d(static_cast<std::size_t>(nv));
            // Thomas algorithm on the symmetric tridiagonal mode matrix
            cplx prev_c = 0.0, prev_d = 0.0;
            for (int j = 0; j < nv; ++j) {
                const double off = -idz;
                const double k_diag = (j > 0 ? idz : 0.0) + (j + 1 < nv ? idz : 0.0);
                const cplx diag = k_diag + shift * mass(j);
                const cplx denom = diag - (j > 0 ? off * prev_c : cplx(0.0));
                const cplx rhs = spec[static_cast<std::size_t>(j) * nb + b];
                c[static_cast<std::size_t>(j)] = off / denom;
                d[static_cast<std::size_t>(j)] = (rhs - (j > 0 ? off * prev_d : cplx(0.0))) / denom;
                prev_c = c[static_cast<std::size_t>(j)];
                prev_d = d[static_cast<std::size_t>(j)];
            }
            cplx next = 0.0;
            for (int j = nv - 1; j >= 0; --j) {
                const std::size_t jj = static_cast<std::size_t>(j);
                next = d[jj] - (j + 1 < nv ? c[jj] * next : cplx(0.0));
                spec[jj * nb + b] = next;
            }
        },
        options_.exec);
    kernels::for_each_index(
        static_cast<std::size_t>(nv),
        [&](std::size_t j) { g.inverse(std::span<const cplx>(spec).subspan(j * nb, nb), z.subspan(j * nb, nb)); },
        options_.exec);
}

IterativeResult FdRobinOperator::solve(cplx lambda, std::span<const cplx> h) const
{
    if (h.size() != size())
        throw Error(ErrorKind::shape_mismatch, "fd right-hand side size");
    const bool hermitian = lambda.imag() == 0.0;
    const std::size_t nb = slab_.boundary().size();
    cvec b(size());
    for (int j = 0; j < vertices(); ++j)
        for (std::size_t i = 0; i < nb; ++i)
            b[static_cast<std::size_t>(j) * nb + i] = mass(j) * h[static_cast<std::size_t>(j) * nb + i];

    IterativeResult res;
    res.solution.assign(size(), 0.0);
    const double bnorm = std::sqrt(kernels::norm_sq(b));
    if (bnorm == 0.0)
        return res;
    cvec r = b, z(size()), p(size()), q(size());
    precondition(lambda, r, z);
    p = z;
    cplx rz = product(r, z, hermitian);
    for (int it = 1; it <= options_.max_iterations; ++it) {
        apply(lambda, p, q);
        const cplx curv = product(q, p, hermitian);
        if (hermitian && !(curv.real() > 0.0)) {
            std::ostringstream os;
            os << "form operator minus lambda = " << lambda.real() << " is not positive";
            throw SolverError(ErrorKind::indefinite_system, os.str(), curv.real());
        }
        if (curv == 0.0)
            throw SolverError(ErrorKind::non_convergence, "COCG breakdown", std::sqrt(kernels::norm_sq(r)) / bnorm);
        const cplx a = rz / curv;
        kernels::axpy(a, std::span<const cplx>(p), std::span<cplx>(res.solution));
        kernels::axpy(-a, std::span<const cplx>(q), std::span<cplx>(r));
        const double rel = std::sqrt(kernels::norm_sq(r)) / bnorm;
        res.history.push_back(rel);
        res.iterations = it;
        res.residual = rel;
        if (rel <= options_.tolerance)
            return res;
        precondition(lambda, r, z);
        const cplx rz_new = product(r, z, hermitian);
        const cplx beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = z[i] + beta * p[i];
    }
    std::ostringstream os;
    os << "fd oracle stalled at relative residual " << res.residual;
    throw SolverError(ErrorKind::non_convergence, os.str(), res.residual);
}

Eigen::MatrixXd FdRobinOperator::dense(double lambda) const
{
    const auto n = static_cast<Eigen::Index>(size());
    if (n > 4096)
        throw Error(ErrorKind::invalid_size, "dense fd matrix limited to 4096 unknowns");
    Eigen::MatrixXd a(n, n);
    cvec e(size()), col(size());
    for (Eigen::Index j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), cplx(0.0));
        e[static_cast<std::size_t>(j)] = 1.0;
        apply(lambda, e, col);
        for (Eigen::Index i = 0; i < n; ++i)
            a(i, j) = col[static_cast<std::size_t>(i)].real();
    }
    return a;
}

FdOracleResult fd_robin_oracle(const RobinCoefficient& alpha, const SlabGrid& slab, cplx lambda,
                               const SlabFunction& h, const FdOptions& options)
{
    if (!(h.grid == slab))
        throw Error(ErrorKind::shape_mismatch, "right-hand side lives on a different slab");
    const FdRobinOperator op(alpha, slab, options);
    const HalfspaceModel model{slab, Geometry::slab};
    const auto z = op.heights();
    const cvec hv = SlabField::from_samples(h, model).sample_at(z);

    FdOracleResult out{SlabFunction(slab), {}, op.solve(lambda, hv)};
    out.vertex_values = out.stats.solution;
    const std::size_t nb = slab.boundary().size();
    for (int m = 0; m < slab.levels(); ++m)
        for (std::size_t b = 0; b < nb; ++b) {
            const std::size_t lo = static_cast<std::size_t>(m) * nb + b;
            out.u.values[lo] = 0.5 * (out.vertex_values[lo] + out.vertex_values[lo + nb]);
        }
    return out;
}

} // namespace robinlap
