#pragma once

#include "robinlap/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace robinlap {

enum class Geometry { halfspace, slab };

/// Which Weyl symbol to use: (|xi|^2 - lambda)^{-1/2} on the half-space, or
/// coth(omega H) / omega for the slab with a Neumann wall at height H.
struct WeylGeometry {
    Geometry kind = Geometry::slab;
    double height = 0.0;

    static WeylGeometry halfspace() { return {Geometry::halfspace, 0.0}; }
    static WeylGeometry slab(double h) { return {Geometry::slab, h}; }
};

/// Throws cut-violation if lambda lies on [0, inf).
void require_off_cut(cplx lambda);
bool on_cut(cplx lambda) noexcept;

/// omega = (xi^2 - lambda)^{1/2} on the branch with positive real part.
cplx weyl_root(double xi_sq, cplx lambda);

/// exp(z) - 1 without cancellation near zero.
cplx expm1(cplx z);

/// coth(z) for Re z > 0, evaluated through exp(-2z) so large arguments are safe.
cplx coth(cplx z);

/// Diagonal operator in frequency space. Symbols are stored in the grid's
/// spectral (FFT) order.
class FourierMultiplier {
public:
    FourierMultiplier(BoundaryGrid grid, cvec symbol, std::string label);

    const BoundaryGrid& grid() const noexcept { return grid_; }
    const cvec& symbol() const noexcept { return symbol_; }
    const std::string& label() const noexcept { return label_; }

    FourierMultiplier conj() const;

private:
    BoundaryGrid grid_;
    cvec symbol_;
    std::string label_;
};

FourierMultiplier weyl_symbol(cplx lambda, const BoundaryGrid& grid, WeylGeometry geometry);
/// (1 + |xi|^2)^{s/2}
FourierMultiplier sobolev_weight(const BoundaryGrid& grid, double s);
FourierMultiplier constant_multiplier(const BoundaryGrid& grid, cplx value);

BoundaryFunction apply_multiplier(const FourierMultiplier& m, const BoundaryFunction& phi);
/// In-place on node values.
void apply_multiplier(const FourierMultiplier& m, std::span<cplx> nodes);

/// CSV with one row per frequency: frequency index tuple, Re, Im.
void write_symbol_csv(const std::filesystem::path& path, const FourierMultiplier& m);

/// Finite composition of multipliers and pointwise multiplications acting on
/// node values. Factors are applied in the order they are appended.
class BoundaryOperator {
public:
    struct Pointwise {
        cvec values;
    };
    using Factor = std::variant<FourierMultiplier, Pointwise>;

    explicit BoundaryOperator(BoundaryGrid grid) : grid_(std::move(grid)) {}

    BoundaryOperator& then(FourierMultiplier m);
    BoundaryOperator& then_pointwise(cvec values);
    BoundaryOperator& then_pointwise(std::span<const double> values);

    const BoundaryGrid& grid() const noexcept { return grid_; }
    const std::vector<Factor>& factors() const noexcept { return factors_; }

    void apply(std::span<cplx> nodes) const;
    cvec apply(std::span<const cplx> nodes) const;
    BoundaryFunction apply(const BoundaryFunction& phi) const;

    BoundaryOperator adjoint() const;

    /// Column-by-column realization; intended for grids with at most 1024 nodes.
    Eigen::MatrixXcd dense() const;

private:
    BoundaryGrid grid_;
    std::vector<Factor> factors_;
};

struct NormEstimate {
    double value = 0.0;
    std::vector<double> history;  // running maximum after each iteration
};

/// Seeded power iteration on A*A. Every history entry is a lower bound on
/// ||A||, and the history is non-decreasing.
NormEstimate estimate_operator_norm_detailed(const BoundaryOperator& a, int iters, std::uint64_t seed);

inline double estimate_operator_norm(const BoundaryOperator& a, int iters, std::uint64_t seed)
{
    return estimate_operator_norm_detailed(a, iters, seed).value;
}

/// Largest singular value of the dense realization.
double dense_operator_norm(const BoundaryOperator& a);

} // namespace robinlap
