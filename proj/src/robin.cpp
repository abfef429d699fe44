#include "robinlap/robin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robinlap {

CoefficientSplit split_lp_linf(std::span<const double> alpha, const SplitOptions& options)
{
    CoefficientSplit out;
    out.singular.assign(alpha.size(), 0.0);
    out.bounded.assign(alpha.size(), 0.0);
    if (alpha.empty())
        return out;
    if (options.threshold) {
        out.threshold = *options.threshold;
    } else {
        if (!(options.percentile > 0.0 && options.percentile <= 1.0))
            throw Error(ErrorKind::invalid_argument, "split percentile must lie in (0, 1]");
        std::vector<double> mag(alpha.size());
        std::transform(alpha.begin(), alpha.end(), mag.begin(), [](double a) { return std::abs(a); });
        auto rank = static_cast<std::size_t>(std::ceil(options.percentile * static_cast<double>(mag.size())));
        rank = std::clamp<std::size_t>(rank, 1, mag.size()) - 1;
        std::nth_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(rank), mag.end());
        out.threshold = mag[rank];
    }
    for (std::size_t i = 0; i < alpha.size(); ++i)
        (std::abs(alpha[i]) > out.threshold ? out.singular : out.bounded)[i] = alpha[i];
    return out;
}

bool robin_admissible(int d, double p) noexcept
{
    return d == 2 ? p > 2.0 : p > 4.0 * (d - 1) / 3.0;
}

bool form_admissible(int d, double p) noexcept
{
    return d == 2 ? p > 1.0 : p >= d - 1.0;
}

RobinCoefficient::RobinCoefficient(BoundaryGrid grid, std::vector<double> samples, double p, SplitOptions split,
                                   double t)
    : grid_(std::move(grid)), samples_(std::move(samples)), p_(p), t_(t)
{
    if (samples_.size() != grid_.size())
        throw Error(ErrorKind::shape_mismatch, "coefficient needs one sample per boundary node");
    for (double a : samples_)
        if (!std::isfinite(a))
            throw Error(ErrorKind::non_finite, "coefficient sample is NaN or infinite");
    if (!(t > 0.0 && t < 1.0))
        throw Error(ErrorKind::invalid_argument, "factor exponent t must lie in (0, 1)");
    split_ = split_lp_linf(samples_, split);
    b1_.resize(samples_.size());
    b2_.resize(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double a = samples_[i];
        const double mag = std::abs(a);
        // sgn(0) = 0, so b1 b2 = alpha also at zeros
        b1_[i] = a == 0.0 ? 0.0 : std::copysign(std::pow(mag, t_), a);
        b2_[i] = a == 0.0 ? 0.0 : std::pow(mag, 1.0 - t_);
    }
    admissible_ = robin_admissible(grid_.dimension(), p_);
    if (!admissible_) {
        std::ostringstream os;
        os << "p = " << p_ << " is below the resolvent-method range for d = " << grid_.dimension();
        warning_ = os.str();
    }
}

bool RobinCoefficient::is_zero() const noexcept
{
    return std::all_of(samples_.begin(), samples_.end(), [](double a) { return a == 0.0; });
}

double RobinCoefficient::max_abs() const noexcept
{
    double m = 0.0;
    for (double a : samples_)
        m = std::max(m, std::abs(a));
    return m;
}

RobinCoefficient load_coefficient(const Expression& expr, const BoundaryGrid& grid, double p, SplitOptions split,
                                  double t)
{
    std::vector<double> samples(grid.size());
    std::vector<double> x(static_cast<std::size_t>(grid.axes()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int ax = 0; ax < grid.axes(); ++ax)
            x[static_cast<std::size_t>(ax)] = grid.node(i, ax);
        samples[i] = expr(x);
        if (!std::isfinite(samples[i]))
            throw Error(ErrorKind::non_finite, "coefficient '" + expr.text() + "' is not finite at node " +
                                                   std::to_string(i));
    }
    return RobinCoefficient(grid, std::move(samples), p, split, t);
}

RobinCoefficient load_coefficient(const std::string& spec, const BoundaryGrid& grid, double p, SplitOptions split,
                                  double t)
{
    std::filesystem::path file;
    if (spec.rfind("csv:", 0) == 0)
        file = spec.substr(4);
    else if (spec.size() > 4 && spec.compare(spec.size() - 4, 4, ".csv") == 0)
        file = spec;
    if (file.empty())
        return load_coefficient(Expression::parse(spec), grid, p, split, t);

    const cvec values = read_csv(file);
    if (values.size() != grid.size())
        throw Error(ErrorKind::shape_mismatch, "coefficient file has " + std::to_string(values.size()) +
                                                   " samples, grid has " + std::to_string(grid.size()));
    std::vector<double> samples(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
            throw Error(ErrorKind::non_finite, "coefficient sample " + std::to_string(i) + " is not finite");
        if (values[i].imag() != 0.0)
            throw Error(ErrorKind::non_real, "coefficient sample " + std::to_string(i) + " is not real");
        samples[i] = values[i].real();
    }
    return RobinCoefficient(grid, std::move(samples), p, split, t);
}

BoundaryOperator boundary_operator(cplx lambda, const RobinCoefficient& alpha, WeylGeometry geometry,
                                   Factorization factorization)
{
    const auto& g = alpha.grid();
    BoundaryOperator k(g);
    if (factorization == Factorization::factored)
        k.then_pointwise(alpha.b1()).then(weyl_symbol(lambda, g, geometry)).then_pointwise(alpha.b2());
    else
        k.then(weyl_symbol(lambda, g, geometry)).then_pointwise(alpha.samples());
    return k;
}

Lambda0Result find_lambda0(const RobinCoefficient& alpha, WeylGeometry geometry, const Lambda0Options& options)
{
    if (!(options.start < 0.0))
        throw Error(ErrorKind::invalid_argument, "lambda0 search must start below zero");
    Lambda0Result out;
    double lambda = options.start;
    double last = 0.0;
    while (-lambda <= options.cap) {
        const auto k = boundary_operator(lambda, alpha, geometry);
        last = estimate_operator_norm(k, options.iterations, options.seed);
        out.history.emplace_back(lambda, last);
        if (last <= options.target) {
            const double cert = estimate_operator_norm(k, options.iterations, options.seed + 0x9e3779b97f4a7c15ULL);
            if (cert <= options.target + options.certificate_slack) {
                out.lambda0 = lambda;
                out.norm = last;
                out.certified_norm = cert;
                return out;
            }
        }
        lambda *= 2.0;
    }
    std::ostringstream os;
    os << "no lambda0 with |lambda0| <= " << options.cap << " brings the boundary operator norm to "
       << options.target << " (last estimate " << last << ")";
    throw SolverError(ErrorKind::not_found, os.str(), last);
}

BoundarySolveResult solve_boundary_equation(cplx lambda, const RobinCoefficient& alpha, const BoundaryFunction& psi,
                                            WeylGeometry geometry, const SolveOptions& options)
{
    require_off_cut(lambda);
    require_same_grid(alpha.grid(), psi.grid);
    if (psi.space != Space::nodes)
        throw Error(ErrorKind::shape_mismatch, "boundary equation expects node values");
    const auto k = boundary_operator(lambda, alpha, geometry, options.factorization);
    const LinearMap apply_k = [&k](const cvec& x) { return k.apply(std::span<const cplx>(x)); };

    BoundarySolveResult out{BoundaryFunction(psi.grid), {}, Method::krylov};
    Method method = options.method;
    double knorm = std::numeric_limits<double>::quiet_NaN();
    if (method != Method::krylov) {
        knorm = estimate_operator_norm(k, options.norm_iterations, options.seed);
        const bool contractive = knorm < 1.0 - options.contraction_margin;
        if (method == Method::automatic)
            method = contractive ? Method::neumann_series : Method::krylov;
        else if (!contractive) {
            std::ostringstream os;
            os << "boundary operator norm estimate " << knorm << " is not below 1 - " << options.contraction_margin;
            throw SolverError(ErrorKind::contraction_violation, os.str(), knorm);
        }
    }
    out.method = method;
    if (method == Method::neumann_series) {
        out.operator_norm = knorm;
        out.stats = neumann_series(apply_k, psi.values, options.iterative);
    } else {
        const LinearMap one_minus_k = [&k](const cvec& x) {
            cvec y = k.apply(std::span<const cplx>(x));
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = x[i] - y[i];
            return y;
        };
        out.stats = gmres(one_minus_k, psi.values, options.iterative);
    }
    out.phi.values = out.stats.solution;
    return out;
}

double boundary_residual(const SlabField& u, const RobinCoefficient& alpha)
{
    require_same_grid(u.grid().boundary(), alpha.grid());
    const auto t = traces(u);
    cvec a_dir = t.dirichlet.values;
    kernels::multiply(std::span<cplx>(a_dir), std::span<const double>(alpha.samples()));
    const double n_neu = std::sqrt(kernels::norm_sq(t.neumann.values));
    const double n_dir = std::sqrt(kernels::norm_sq(a_dir));
    kernels::axpy(-1.0, t.neumann.values, a_dir);
    const double scale = std::max({n_neu, n_dir, 1e-300});
    return std::sqrt(kernels::norm_sq(a_dir)) / scale;
}

KreinSolveResult krein_resolvent(cplx lambda, const SlabField& h, const RobinCoefficient& alpha,
                                 const KreinOptions& options)
{
    require_off_cut(lambda);
    const auto& model = h.model();
    const auto& grid = alpha.grid();
    require_same_grid(model.slab.boundary(), grid);

    SlabField u0 = neumann_resolvent(lambda, h);
    const BoundaryFunction g = traces(u0).dirichlet;  // gamma(conj lambda)^* h
    const bool factored = options.solve.factorization == Factorization::factored;

    BoundaryFunction psi = g;
    kernels::multiply(std::span<cplx>(psi.values),
                      std::span<const double>(factored ? alpha.b2() : alpha.samples()));
    auto solve = solve_boundary_equation(lambda, alpha, psi, model.weyl(), options.solve);

    BoundaryFunction density = solve.phi;
    if (factored)
        kernels::multiply(std::span<cplx>(density.values), std::span<const double>(alpha.b1()));

    const SlabField correction = gamma_apply(lambda, density, model);
    KreinSolveResult out{u0 + correction, solve.phi, density, 0.0, 0.0, 0.0, {}};
    out.correction_norm = norm(correction);
    out.iterations = std::move(solve.stats);
    out.method = solve.method;
    if (options.lambda0)
        out.lambda0_used = *options.lambda0;

    const double hn = norm(h);
    out.residual_pde = hn > 0.0 ? norm(shifted_laplacian(out.u, lambda) - h) / hn : norm(shifted_laplacian(out.u, lambda));
    out.residual_bc = boundary_residual(out.u, alpha);
    out.residuals_ok = out.residual_pde <= options.residual_threshold && out.residual_bc <= options.residual_threshold;
    return out;
}

KreinSolveResult krein_resolvent(cplx lambda, const SlabFunction& h, const RobinCoefficient& alpha,
                                 const HalfspaceModel& model, const KreinOptions& options)
{
    return krein_resolvent(lambda, SlabField::from_samples(h, model), alpha, options);
}

std::string_view to_string(Method m) noexcept
{
    switch (m) {
    case Method::automatic: return "automatic";
    case Method::neumann_series: return "neumann_series";
    case Method::krylov: return "krylov";
    }
    return "unknown";
}

} // namespace robinlap
