#pragma once

#include "robinlap/expression.hpp"
#include "robinlap/halfspace.hpp"
#include "robinlap/iterative.hpp"
#include "robinlap/multiplier.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace robinlap {

/// Threshold split alpha = alpha_p + alpha_inf with alpha_p = alpha 1_{|alpha| > level}.
struct SplitOptions {
    double percentile = 0.95;           // of |alpha| over the nodes
    std::optional<double> threshold;    // overrides the percentile
};

struct CoefficientSplit {
    std::vector<double> singular;  // alpha_p
    std::vector<double> bounded;   // alpha_inf, |alpha_inf| <= threshold
    double threshold = 0.0;
};

CoefficientSplit split_lp_linf(std::span<const double> alpha, const SplitOptions& options = {});

/// Integrability needed by the resolvent construction: p > 4(d-1)/3 for
/// d >= 3, p > 2 for d = 2.
bool robin_admissible(int d, double p) noexcept;
/// Integrability needed by the form construction: p >= d-1 for d >= 3,
/// p > 1 for d = 2.
bool form_admissible(int d, double p) noexcept;

/// Grid samples of a real Robin coefficient, its split and the factors
/// b1 = sgn(alpha) |alpha|^t, b2 = |alpha|^{1-t} (t = 1/3 by default).
class RobinCoefficient {
public:
    RobinCoefficient(BoundaryGrid grid, std::vector<double> samples, double p, SplitOptions split = {},
                     double t = 1.0 / 3.0);

    const BoundaryGrid& grid() const noexcept { return grid_; }
    const std::vector<double>& samples() const noexcept { return samples_; }
    double p() const noexcept { return p_; }
    double exponent() const noexcept { return t_; }
    const CoefficientSplit& split() const noexcept { return split_; }
    const std::vector<double>& b1() const noexcept { return b1_; }
    const std::vector<double>& b2() const noexcept { return b2_; }
    bool admissible() const noexcept { return admissible_; }
    /// Empty when admissible.
    const std::string& warning() const noexcept { return warning_; }
    bool is_zero() const noexcept;
    double max_abs() const noexcept;

private:
    BoundaryGrid grid_;
    std::vector<double> samples_;
    double p_;
    double t_;
    CoefficientSplit split_;
    std::vector<double> b1_, b2_;
    bool admissible_;
    std::string warning_;
};

/// `spec` is either a closed-form expression or a CSV sample file, written
/// as "csv:<path>" or any path ending in ".csv". CSV rows are
/// "index,real,imag" in node order.
RobinCoefficient load_coefficient(const std::string& spec, const BoundaryGrid& grid, double p,
                                  SplitOptions split = {}, double t = 1.0 / 3.0);
RobinCoefficient load_coefficient(const Expression& expr, const BoundaryGrid& grid, double p,
                                  SplitOptions split = {}, double t = 1.0 / 3.0);

enum class Factorization {
    factored,    // 1 - B2 M B1, correction gamma B1 (.)^{-1} B2 gamma*
    unfactored,  // 1 - B M,     correction gamma (.)^{-1} B gamma*
};

/// K = B2 M(lambda) B1 (factored) or B M(lambda) (unfactored).
BoundaryOperator boundary_operator(cplx lambda, const RobinCoefficient& alpha, WeylGeometry geometry,
                                   Factorization factorization = Factorization::factored);

struct Lambda0Options {
    double target = 0.5;
    double start = -1.0;
    double cap = 1e8;       // largest |lambda0| tried
    int iterations = 30;    // power iterations per estimate
    std::uint64_t seed = 1;
    double certificate_slack = 1e-6;
};

struct Lambda0Result {
    double lambda0 = 0.0;
    double norm = 0.0;            // estimate that met the target
    double certified_norm = 0.0;  // fresh-seed re-estimate
    std::vector<std::pair<double, double>> history;  // (lambda, estimate)
};

/// Doubles |lambda| from `start` until the norm estimate of B2 M B1 meets the
/// target and a fresh-seed re-estimate stays within the slack. Throws
/// not-found (value = last estimate) beyond the cap.
Lambda0Result find_lambda0(const RobinCoefficient& alpha, WeylGeometry geometry, const Lambda0Options& options = {});

enum class Method { automatic, neumann_series, krylov };

struct SolveOptions {
    Method method = Method::automatic;
    Factorization factorization = Factorization::factored;
    IterativeOptions iterative{};
    int norm_iterations = 30;
    std::uint64_t seed = 1;
    /// The series is refused when the norm estimate is >= 1 - margin.
    double contraction_margin = 1e-3;
};

struct BoundarySolveResult {
    BoundaryFunction phi;
    IterativeResult stats;
    Method method = Method::krylov;
    double operator_norm = std::numeric_limits<double>::quiet_NaN();  // series only
};

/// Solves (1 - K) phi = psi, K as in boundary_operator.
BoundarySolveResult solve_boundary_equation(cplx lambda, const RobinCoefficient& alpha, const BoundaryFunction& psi,
                                            WeylGeometry geometry, const SolveOptions& options = {});

struct KreinOptions {
    SolveOptions solve{};
    double residual_threshold = 1e-8;
    std::optional<double> lambda0;  // recorded in the result
};

struct KreinSolveResult {
    SlabField u;
    BoundaryFunction boundary_density;    // phi
    BoundaryFunction correction_density;  // b1 phi, the Neumann datum of the correction
    double residual_pde = 0.0;
    double residual_bc = 0.0;
    double correction_norm = 0.0;
    IterativeResult iterations;
    Method method = Method::krylov;
    double lambda0_used = std::numeric_limits<double>::quiet_NaN();
    bool residuals_ok = false;
};

/// u = (A_N - lambda)^{-1} h + gamma(lambda) B1 (1 - B2 M(lambda) B1)^{-1} B2 gamma(conj lambda)^* h
KreinSolveResult krein_resolvent(cplx lambda, const SlabField& h, const RobinCoefficient& alpha,
                                 const KreinOptions& options = {});
KreinSolveResult krein_resolvent(cplx lambda, const SlabFunction& h, const RobinCoefficient& alpha,
                                 const HalfspaceModel& model, const KreinOptions& options = {});

/// ||alpha tau_D u - tau_N u|| / max(||tau_N u||, ||alpha tau_D u||, tiny)
double boundary_residual(const SlabField& u, const RobinCoefficient& alpha);

std::string_view to_string(Method m) noexcept;

} // namespace robinlap
