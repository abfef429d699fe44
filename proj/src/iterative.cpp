#include "robinlap/iterative.hpp"

#include <cmath>
#include <sstream>

namespace robinlap {

namespace {

double norm2(const cvec& x) { return std::sqrt(kernels::norm_sq(x)); }

[[noreturn]] void fail(const char* method, int iterations, double residual)
{
    std::ostringstream os;
    os << method << " did not converge in " << iterations << " iterations (relative residual " << residual << ")";
    throw SolverError(ErrorKind::non_convergence, os.str(), residual);
}

} // namespace

IterativeResult neumann_series(const LinearMap& k, const cvec& b, const IterativeOptions& options)
{
    IterativeResult out;
    out.solution = b;
    const double bn = norm2(b);
    if (bn == 0.0)
        return out;
    for (int it = 0; it <= options.max_iterations; ++it) {
        cvec r = k(out.solution);
        // r = b + K x - x
        kernels::axpy(1.0, b, r);
        kernels::axpy(-1.0, out.solution, r);
        const double rel = norm2(r) / bn;
        out.history.push_back(rel);
        out.residual = rel;
        out.iterations = it;
        if (!std::isfinite(rel))
            fail("Neumann series", it, rel);
        if (rel <= options.tolerance)
            return out;
        if (it == options.max_iterations)
            break;
        kernels::axpy(1.0, r, out.solution);
    }
    fail("Neumann series", options.max_iterations, out.residual);
}

IterativeResult gmres(const LinearMap& a, const cvec& b, const IterativeOptions& options)
{
    const std::size_t n = b.size();
    const auto m = static_cast<std::size_t>(std::max(1, options.restart));
    IterativeResult out;
    out.solution.assign(n, 0.0);
    const double bn = norm2(b);
    if (bn == 0.0)
        return out;

    int total = 0;
    cvec r = b;
    double beta = bn;
    out.history.push_back(1.0);
    while (total < options.max_iterations) {
        std::vector<cvec> v{r};
        for (auto& x : v[0])
            x /= beta;
        // Columns of the rotated Hessenberg matrix, i.e. of R.
        std::vector<std::vector<cplx>> rcol;
        // Rotation j maps (x, y) to (conj(c) x + conj(s) y, -s x + c y).
        std::vector<cplx> cs, sn;
        std::vector<cplx> g{beta};
        std::size_t j = 0;
        while (j < m && total < options.max_iterations) {
            cvec w = a(v[j]);
            std::vector<cplx> h(j + 2, 0.0);
            for (std::size_t i = 0; i <= j; ++i) {
                h[i] = kernels::dot(w, v[i]);
                kernels::axpy(-h[i], v[i], w);
            }
            const double wn = norm2(w);
            h[j + 1] = wn;
            for (std::size_t i = 0; i < j; ++i) {
                const cplx t = std::conj(cs[i]) * h[i] + std::conj(sn[i]) * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            const double rho = std::hypot(std::abs(h[j]), wn);
            const cplx c = rho > 0.0 ? h[j] / rho : cplx(1.0);
            const cplx s = rho > 0.0 ? cplx(wn / rho) : cplx(0.0);
            cs.push_back(c);
            sn.push_back(s);
            h[j] = rho;
            h[j + 1] = 0.0;
            g.push_back(-s * g[j]);
            g[j] = std::conj(c) * g[j];
            h.pop_back();
            rcol.push_back(std::move(h));
            ++j;
            ++total;
            out.history.push_back(std::abs(g[j]) / bn);
            if (wn == 0.0 || std::abs(g[j]) <= 0.5 * options.tolerance * bn)
                break;
            for (auto& x : w)
                x /= wn;
            v.push_back(std::move(w));
        }
        std::vector<cplx> y(j, 0.0);
        for (std::size_t i = j; i-- > 0;) {
            cplx acc = g[i];
            for (std::size_t l = i + 1; l < j; ++l)
                acc -= rcol[l][i] * y[l];
            y[i] = acc / rcol[i][i];
        }
        for (std::size_t i = 0; i < j; ++i)
            kernels::axpy(y[i], v[i], out.solution);

        r = a(out.solution);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = b[i] - r[i];
        beta = norm2(r);
        out.residual = beta / bn;
        out.iterations = total;
        if (!std::isfinite(out.residual))
            fail("GMRES", total, out.residual);
        if (out.residual <= options.tolerance)
            return out;
    }
    fail("GMRES", total, out.residual);
}

} // namespace robinlap
