#include "robinlap/triple_lab.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace robinlap {

namespace {

double max_entry(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double min_singular(const Matrix& m)
{
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().minCoeff();
}

double max_singular(const Matrix& m)
{
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

Matrix shifted(const Matrix& a, cplx lambda)
{
    return a - lambda * Matrix::Identity(a.rows(), a.cols());
}

// Inverse of a - lambda, refusing numerically singular shifts.
Matrix resolvent(const Matrix& a, cplx lambda, const char* what)
{
    const Matrix s = shifted(a, lambda);
    const double smin = min_singular(s);
    if (smin <= 1e-12 * std::max(1.0, max_singular(s))) {
        std::ostringstream os;
        os << "lambda = " << lambda << " is an eigenvalue of " << what;
        throw Error(ErrorKind::spectral_collision, os.str());
    }
    return s.partialPivLu().inverse();
}

} // namespace

DiscreteTriple::DiscreteTriple(int n, double h) : n_(n), h_(h)
{
    if (n < 3)
        throw Error(ErrorKind::invalid_size, "discrete triple needs n >= 3");
    if (!(h > 0.0))
        throw Error(ErrorKind::invalid_argument, "mesh width must be positive");
    const double ih2 = 1.0 / (h * h);
    t_ = Matrix::Zero(n, n + 2);
    for (int i = 0; i < n; ++i) {
        t_(i, i) = -ih2;
        t_(i, i + 1) = 2.0 * ih2;
        t_(i, i + 2) = -ih2;
    }
    g0_ = Matrix::Zero(2, n + 2);
    g0_(0, 0) = 1.0 / h;
    g0_(0, 1) = -1.0 / h;
    g0_(1, n + 1) = 1.0 / h;
    g0_(1, n) = -1.0 / h;
    g1_ = Matrix::Zero(2, n + 2);
    g1_(0, 0) = g1_(0, 1) = 0.5;
    g1_(1, n) = g1_(1, n + 1) = 0.5;
}

Matrix DiscreteTriple::neumann_matrix() const { return extension_matrix(*this, Matrix::Zero(2, 2)); }

DiscreteTriple build_discrete_triple(int n, double h) { return DiscreteTriple(n, h); }

double green_residual(const DiscreteTriple& t, const Vector& f, const Vector& g)
{
    const Vector tf = t.T() * f, tg = t.T() * g;
    const cplx lhs = t.inner(tf, t.interior(g)) - t.inner(t.interior(f), tg);
    const Vector g0f = t.gamma0() * f, g1f = t.gamma1() * f;
    const Vector g0g = t.gamma0() * g, g1g = t.gamma1() * g;
    const cplx rhs = g0g.dot(g1f) - g1g.dot(g0f);
    return std::abs(lhs - rhs);
}

TripleWeyl weyl_of_triple(const DiscreteTriple& t, cplx lambda)
{
    const int n = t.n();
    // [(T - lambda E); Gamma0] f = [0; e_j]
    Matrix s(n + 2, n + 2);
    s.topRows(n) = t.T();
    for (int i = 0; i < n; ++i)
        s(i, i + 1) -= lambda;
    s.bottomRows(2) = t.gamma0();
    const double smin = min_singular(s);
    if (smin <= 1e-12 * std::max(1.0, max_singular(s))) {
        std::ostringstream os;
        os << "lambda = " << lambda << " is an eigenvalue of A0";
        throw Error(ErrorKind::spectral_collision, os.str());
    }
    Matrix rhs = Matrix::Zero(n + 2, 2);
    rhs(n, 0) = 1.0;
    rhs(n + 1, 1) = 1.0;
    TripleWeyl out;
    out.gamma_extended = s.partialPivLu().solve(rhs);
    out.gamma = out.gamma_extended.middleRows(1, n);
    out.M = t.gamma1() * out.gamma_extended;
    return out;
}

Matrix adjoint_gamma(const DiscreteTriple& t, cplx lambda)
{
    const Matrix r = resolvent(t.neumann_matrix(), lambda, "A0");
    // Gamma1 of a Neumann-extended vector reads the first and last interior value.
    Matrix out(2, t.n());
    out.row(0) = r.row(0);
    out.row(1) = r.row(t.n() - 1);
    return out;
}

FactoredBoundaryOperator FactoredBoundaryOperator::unfactored(const Matrix& b)
{
    FactoredBoundaryOperator f;
    f.B = b;
    f.B1 = Matrix::Identity(2, 2);
    f.B2 = b;
    f.symmetric = (b - b.adjoint()).norm() <= 1e-14 * std::max(1.0, b.norm());
    return f;
}

FactoredBoundaryOperator FactoredBoundaryOperator::from_factors(const Matrix& b1, const Matrix& b2)
{
    if (b1.rows() != 2 || b1.cols() != 2 || b2.rows() != 2 || b2.cols() != 2)
        throw Error(ErrorKind::shape_mismatch, "boundary factors must be 2 x 2");
    FactoredBoundaryOperator f;
    f.B1 = b1;
    f.B2 = b2;
    f.B = b1 * b2;
    f.symmetric = (f.B - f.B.adjoint()).norm() <= 1e-14 * std::max(1.0, f.B.norm());
    return f;
}

FactoredBoundaryOperator FactoredBoundaryOperator::symmetric_split(const Matrix& b)
{
    if ((b - b.adjoint()).norm() > 1e-14 * std::max(1.0, b.norm()))
        throw Error(ErrorKind::invalid_argument, "symmetric split needs a Hermitian B");
    const Matrix herm = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(herm);
    const Matrix& u = eig.eigenvectors();
    Eigen::VectorXd l = eig.eigenvalues();
    Matrix d1 = Matrix::Zero(2, 2), d2 = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
        const double mag = std::abs(l(i));
        d1(i, i) = l(i) == 0.0 ? 0.0 : std::copysign(std::cbrt(mag), l(i));
        d2(i, i) = std::pow(mag, 2.0 / 3.0);
    }
    FactoredBoundaryOperator f;
    f.B = b;
    f.B1 = u * d1;
    f.B2 = d2 * u.adjoint();
    f.symmetric = true;
    return f;
}

Matrix extension_matrix(const DiscreteTriple& t, const Matrix& b)
{
    if (b.rows() != 2 || b.cols() != 2)
        throw Error(ErrorKind::shape_mismatch, "boundary operator must be 2 x 2");
    const int n = t.n();
    const double h = t.h();
    // ghosts g = (f_0, f_{n+1}), edge values e = (f_1, f_n):
    // (g - e)/h = B (g + e)/2  =>  (I/h - B/2) g = (I/h + B/2) e
    const Matrix lhs = Matrix::Identity(2, 2) / h - 0.5 * b;
    const Matrix rhs = Matrix::Identity(2, 2) / h + 0.5 * b;
    if (min_singular(lhs) <= 1e-12 * std::max(1.0 / h, max_singular(lhs)))
        throw Error(ErrorKind::constraint_singular, "ghost elimination is singular for this B");
    const Matrix g = lhs.partialPivLu().solve(rhs);

    const double ih2 = 1.0 / (h * h);
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = 2.0 * ih2;
        if (i > 0)
            a(i, i - 1) = -ih2;
        if (i + 1 < n)
            a(i, i + 1) = -ih2;
    }
    a(0, 0) -= ih2 * g(0, 0);
    a(0, n - 1) -= ih2 * g(0, 1);
    a(n - 1, 0) -= ih2 * g(1, 0);
    a(n - 1, n - 1) -= ih2 * g(1, 1);
    return a;
}

KreinReport verify_krein_matrix(const DiscreteTriple& t, const FactoredBoundaryOperator& f, cplx lambda)
{
    const Matrix a0 = t.neumann_matrix();
    const Matrix ab = extension_matrix(t, f.B);
    const Matrix r0 = resolvent(a0, lambda, "A0");
    const Matrix rb = resolvent(ab, lambda, "A_[B]");
    const TripleWeyl w = weyl_of_triple(t, lambda);
    const Matrix gstar = adjoint_gamma(t, lambda);
    const Matrix diff = rb - r0;

    KreinReport rep;
    rep.scale = max_entry(rb);
    const Matrix inner = Matrix::Identity(2, 2) - f.B2 * w.M * f.B1;
    rep.min_singular_value = min_singular(inner);
    if (rep.min_singular_value <= 1e-13 * max_singular(inner))
        throw Error(ErrorKind::spectral_collision, "1 - B2 M(lambda) B1 is singular");
    const Matrix corr = w.gamma * f.B1 * inner.partialPivLu().solve(f.B2 * gstar);
    rep.deviation = max_entry(diff - corr);

    const Matrix inner_u = Matrix::Identity(2, 2) - f.B * w.M;
    rep.unfactored_available = min_singular(inner_u) > 1e-13 * max_singular(inner_u);
    if (rep.unfactored_available) {
        const Matrix corr_u = w.gamma * inner_u.partialPivLu().solve(f.B * gstar);
        rep.deviation_unfactored = max_entry(diff - corr_u);
        rep.factor_agreement = max_entry(corr - corr_u);
    }
    return rep;
}

ConditionReport check_conditions(const DiscreteTriple& t, const FactoredBoundaryOperator& f, double lambda0)
{
    const TripleWeyl w = weyl_of_triple(t, lambda0);
    const Matrix inner = Matrix::Identity(2, 2) - f.B2 * w.M * f.B1;
    ConditionReport rep;
    rep.min_singular_value = min_singular(inner);
    rep.invertible = rep.min_singular_value > 1e-10 * std::max(1.0, max_singular(inner));
    rep.vacuous = {"(ii) range inclusion for B2 gamma(lambda0)^*: vacuous at finite scale",
                   "(iii) range inclusion for B1: vacuous at finite scale",
                   "(iv) domain inclusion for B2 M B1: vacuous at finite scale",
                   "(v) closability: vacuous at finite scale"};
    rep.all_pass = rep.invertible;
    return rep;
}

Vector solve_boundary_system(const DiscreteTriple& t, const FactoredBoundaryOperator& f, cplx lambda,
                             const Vector& psi, bool series, const IterativeOptions& options)
{
    const TripleWeyl w = weyl_of_triple(t, lambda);
    const Matrix k = f.B2 * w.M * f.B1;
    const LinearMap apply_k = [&k](const cvec& x) {
        const Vector y = k * Eigen::Map<const Vector>(x.data(), 2);
        return cvec(y.data(), y.data() + 2);
    };
    const cvec b(psi.data(), psi.data() + psi.size());
    IterativeResult r;
    if (series) {
        const double knorm = max_singular(k);
        if (knorm >= 1.0 - 1e-12) {
            std::ostringstream os;
            os << "||B2 M B1|| = " << knorm << " is not below 1";
            throw SolverError(ErrorKind::contraction_violation, os.str(), knorm);
        }
        r = neumann_series(apply_k, b, options);
    } else {
        const LinearMap one_minus_k = [&](const cvec& x) {
            cvec y = apply_k(x);
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = x[i] - y[i];
            return y;
        };
        r = gmres(one_minus_k, b, options);
    }
    return Eigen::Map<const Vector>(r.solution.data(), 2);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    out.precision(17);
    out << "row,col,real,imag\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << i << ',' << j << ',' << m(i, j).real() << ',' << m(i, j).imag() << '\n';
    if (!out)
        throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

} // namespace robinlap
