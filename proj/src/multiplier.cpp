#include "robinlap/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace robinlap {

bool on_cut(cplx lambda) noexcept { return lambda.imag() == 0.0 && lambda.real() >= 0.0; }

void require_off_cut(cplx lambda)
{
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
        throw Error(ErrorKind::invalid_argument, "spectral parameter must be finite");
    if (on_cut(lambda)) {
        std::ostringstream os;
        os << "lambda = " << lambda.real() << " lies on [0, inf)";
        throw Error(ErrorKind::cut_violation, os.str());
    }
}

cplx weyl_root(double xi_sq, cplx lambda)
{
    cplx w = std::sqrt(cplx(xi_sq) - lambda);
    if (w.real() < 0.0)
        w = -w;
    return w;
}

cplx expm1(cplx z)
{
    if (std::abs(z) < 0.5) {
        // sum_{n>=1} z^n / n!
        cplx term = z;
        cplx sum = z;
        for (int n = 2; n < 30; ++n) {
            term *= z / static_cast<double>(n);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum))
                break;
        }
        return sum;
    }
    return std::exp(z) - 1.0;
}

cplx coth(cplx z)
{
    // (1 + e^{-2z}) / (1 - e^{-2z})
    const cplx e = std::exp(-2.0 * z);
    return (1.0 + e) / (-expm1(-2.0 * z));
}

FourierMultiplier::FourierMultiplier(BoundaryGrid grid, cvec symbol, std::string label)
    : grid_(std::move(grid)), symbol_(std::move(symbol)), label_(std::move(label))
{
    if (symbol_.size() != grid_.size())
        throw Error(ErrorKind::shape_mismatch, "symbol needs one entry per frequency");
}

FourierMultiplier FourierMultiplier::conj() const
{
    cvec s(symbol_.size());
    std::transform(symbol_.begin(), symbol_.end(), s.begin(), [](cplx v) { return std::conj(v); });
    return FourierMultiplier(grid_, std::move(s), "conj(" + label_ + ")");
}

FourierMultiplier weyl_symbol(cplx lambda, const BoundaryGrid& grid, WeylGeometry geometry)
{
    require_off_cut(lambda);
    if (geometry.kind == Geometry::slab && !(geometry.height > 0.0))
        throw Error(ErrorKind::invalid_argument, "slab Weyl symbol needs a positive height");
    const auto xi2 = grid.frequency_sq();
    cvec s(grid.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const cplx w = weyl_root(xi2[i], lambda);
        s[i] = geometry.kind == Geometry::halfspace ? 1.0 / w : coth(w * geometry.height) / w;
    }
    std::ostringstream label;
    label << (geometry.kind == Geometry::halfspace ? "weyl-halfspace" : "weyl-slab") << "(" << lambda.real()
          << (lambda.imag() < 0 ? "" : "+") << lambda.imag() << "i)";
    return FourierMultiplier(grid, std::move(s), label.str());
}

FourierMultiplier sobolev_weight(const BoundaryGrid& grid, double s)
{
    const auto xi2 = grid.frequency_sq();
    cvec w(grid.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::pow(1.0 + xi2[i], 0.5 * s);
    return FourierMultiplier(grid, std::move(w), "sobolev(" + std::to_string(s) + ")");
}

FourierMultiplier constant_multiplier(const BoundaryGrid& grid, cplx value)
{
    return FourierMultiplier(grid, cvec(grid.size(), value), "constant");
}

void apply_multiplier(const FourierMultiplier& m, std::span<cplx> nodes)
{
    const auto& grid = m.grid();
    cvec spec(grid.size());
    grid.forward(nodes, spec);
    kernels::multiply(std::span<cplx>(spec), std::span<const cplx>(m.symbol()));
    grid.inverse(spec, nodes);
}

BoundaryFunction apply_multiplier(const FourierMultiplier& m, const BoundaryFunction& phi)
{
    require_same_grid(m.grid(), phi.grid);
    if (phi.space != Space::nodes)
        throw Error(ErrorKind::shape_mismatch, "apply_multiplier expects node values");
    BoundaryFunction out = phi;
    apply_multiplier(m, out.values);
    return out;
}

void write_symbol_csv(const std::filesystem::path& path, const FourierMultiplier& m)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    out.precision(17);
    const auto& g = m.grid();
    for (int ax = 0; ax < g.axes(); ++ax)
        out << "k" << ax + 1 << ',';
    out << "real,imag\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int ax = 0; ax < g.axes(); ++ax)
            out << g.frequency_index(i, ax) << ',';
        out << m.symbol()[i].real() << ',' << m.symbol()[i].imag() << '\n';
    }
}

// ---------------------------------------------------------------------------

BoundaryOperator& BoundaryOperator::then(FourierMultiplier m)
{
    require_same_grid(grid_, m.grid());
    factors_.emplace_back(std::move(m));
    return *this;
}

BoundaryOperator& BoundaryOperator::then_pointwise(cvec values)
{
    if (values.size() != grid_.size())
        throw Error(ErrorKind::shape_mismatch, "pointwise factor size");
    factors_.emplace_back(Pointwise{std::move(values)});
    return *this;
}

BoundaryOperator& BoundaryOperator::then_pointwise(std::span<const double> values)
{
    return then_pointwise(cvec(values.begin(), values.end()));
}

void BoundaryOperator::apply(std::span<cplx> nodes) const
{
    if (nodes.size() != grid_.size())
        throw Error(ErrorKind::shape_mismatch, "operator input size");
    for (const auto& f : factors_) {
        if (const auto* m = std::get_if<FourierMultiplier>(&f))
            apply_multiplier(*m, nodes);
        else
            kernels::multiply(nodes, std::span<const cplx>(std::get<Pointwise>(f).values));
    }
}

cvec BoundaryOperator::apply(std::span<const cplx> nodes) const
{
    cvec out(nodes.begin(), nodes.end());
    apply(std::span<cplx>(out));
    return out;
}

BoundaryFunction BoundaryOperator::apply(const BoundaryFunction& phi) const
{
    require_same_grid(grid_, phi.grid);
    BoundaryFunction out = phi;
    apply(std::span<cplx>(out.values));
    return out;
}

BoundaryOperator BoundaryOperator::adjoint() const
{
    BoundaryOperator adj(grid_);
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
        if (const auto* m = std::get_if<FourierMultiplier>(&*it)) {
            adj.then(m->conj());
        } else {
            cvec v = std::get<Pointwise>(*it).values;
            for (auto& x : v)
                x = std::conj(x);
            adj.then_pointwise(std::move(v));
        }
    }
    return adj;
}

Eigen::MatrixXcd BoundaryOperator::dense() const
{
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (n > 4096)
        throw Error(ErrorKind::invalid_size, "dense realization limited to 4096 nodes");
    Eigen::MatrixXcd a(n, n);
    cvec e(grid_.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), cplx(0.0));
        e[static_cast<std::size_t>(j)] = 1.0;
        apply(std::span<cplx>(e));
        for (Eigen::Index i = 0; i < n; ++i)
            a(i, j) = e[static_cast<std::size_t>(i)];
    }
    return a;
}

NormEstimate estimate_operator_norm_detailed(const BoundaryOperator& a, int iters, std::uint64_t seed)
{
    if (iters < 1)
        throw Error(ErrorKind::invalid_argument, "power iteration needs iters >= 1");
    const auto adj = a.adjoint();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    cvec x(a.grid().size());
    for (auto& v : x)
        v = cplx(normal(rng), normal(rng));

    NormEstimate est;
    double nx = std::sqrt(kernels::norm_sq(x));
    for (int k = 0; k < iters; ++k) {
        for (auto& v : x)
            v /= nx;
        cvec y = a.apply(std::span<const cplx>(x));
        const double sigma = std::sqrt(kernels::norm_sq(y));
        est.value = std::max(est.value, sigma);
        est.history.push_back(est.value);
        if (sigma == 0.0)
            break;
        adj.apply(std::span<cplx>(y));
        x = std::move(y);
        nx = std::sqrt(kernels::norm_sq(x));
        if (nx == 0.0)
            break;
    }
    return est;
}

double dense_operator_norm(const BoundaryOperator& a)
{
    const Eigen::MatrixXcd m = a.dense();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

} // namespace robinlap
