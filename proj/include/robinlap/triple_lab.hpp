#pragma once

// Finite model of a boundary triple: the ghost-node second difference on n
// interior nodes of width h. Vectors f have n + 2 entries, ghost values at
// index 0 and n + 1. The interior inner product carries the weight h.
//
//   T f_i  = -(f_{i-1} - 2 f_i + f_{i+1}) / h^2,   i = 1..n
//   Gamma0 = ((f_0 - f_1) / h, (f_{n+1} - f_n) / h)      outward differences
//   Gamma1 = ((f_0 + f_1) / 2, (f_n + f_{n+1}) / 2)      midpoint values
//
// With these choices (Tf, g) - (f, Tg) = (Gamma1 f, Gamma0 g) - (Gamma0 f, Gamma1 g)
// holds identically by summation by parts.

#include "robinlap/grid.hpp"
#include "robinlap/iterative.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace robinlap {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class DiscreteTriple {
public:
    DiscreteTriple(int n, double h);

    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    const Matrix& T() const noexcept { return t_; }
    const Matrix& gamma0() const noexcept { return g0_; }
    const Matrix& gamma1() const noexcept { return g1_; }

    /// Interior part of an extended vector.
    Vector interior(const Vector& f) const { return f.segment(1, n_); }
    /// h sum u_i conj(v_i)
    cplx inner(const Vector& u, const Vector& v) const { return h_ * v.dot(u); }

    /// T restricted to ker Gamma0 as an n x n matrix.
    Matrix neumann_matrix() const;

private:
    int n_;
    double h_;
    Matrix t_, g0_, g1_;
};

DiscreteTriple build_discrete_triple(int n, double h);

/// |(Tf,g) - (f,Tg) - (Gamma1 f, Gamma0 g) + (Gamma0 f, Gamma1 g)|
double green_residual(const DiscreteTriple& t, const Vector& f, const Vector& g);

struct TripleWeyl {
    Matrix gamma_extended;  // (n+2) x 2, columns span ker(T - lambda)
    Matrix gamma;           // n x 2 interior rows
    Matrix M;               // 2 x 2, Gamma1 gamma
};

/// Throws spectral-collision when lambda is an eigenvalue of A0.
TripleWeyl weyl_of_triple(const DiscreteTriple& t, cplx lambda);

/// gamma(conj lambda)^* = Gamma1 (A0 - lambda)^{-1}, a 2 x n matrix.
Matrix adjoint_gamma(const DiscreteTriple& t, cplx lambda);

/// B = B1 B2 with 2 x 2 factors.
struct FactoredBoundaryOperator {
    Matrix B, B1, B2;
    bool symmetric = false;

    /// B1 = I, B2 = B.
    static FactoredBoundaryOperator unfactored(const Matrix& b);
    static FactoredBoundaryOperator from_factors(const Matrix& b1, const Matrix& b2);
    /// Hermitian B = U L U^*: B1 = U sgn(L)|L|^{1/3}, B2 = |L|^{2/3} U^*.
    static FactoredBoundaryOperator symmetric_split(const Matrix& b);
};

/// n x n realization of T on {Gamma0 f = B Gamma1 f}; throws constraint-singular
/// when the ghost values cannot be eliminated.
Matrix extension_matrix(const DiscreteTriple& t, const Matrix& b);

struct KreinReport {
    double deviation = 0.0;             // max entry of R_B - R_0 - correction
    double deviation_unfactored = 0.0;  // same with B1 = I, B2 = B
    double factor_agreement = 0.0;      // max entry between the two corrections
    bool unfactored_available = false;  // 1 - B M(lambda) invertible
    double scale = 0.0;                 // max entry of R_B
    double min_singular_value = 0.0;    // of 1 - B2 M(lambda) B1
};

/// Throws spectral-collision when lambda is (numerically) in spec(A0) or
/// spec(A_[B]), or when 1 - B2 M B1 is singular.
KreinReport verify_krein_matrix(const DiscreteTriple& t, const FactoredBoundaryOperator& f, cplx lambda);

struct ConditionReport {
    bool invertible = false;         // condition (i)
    double min_singular_value = 0.0;
    std::vector<std::string> vacuous;
    bool all_pass = false;
};

ConditionReport check_conditions(const DiscreteTriple& t, const FactoredBoundaryOperator& f, double lambda0);

/// Solves (1 - B2 M(lambda) B1) phi = psi on C^2. The series method refuses
/// (contraction-violation) when the exact 2 x 2 norm is >= 1.
Vector solve_boundary_system(const DiscreteTriple& t, const FactoredBoundaryOperator& f, cplx lambda,
                             const Vector& psi, bool series, const IterativeOptions& options = {});

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

} // namespace robinlap
