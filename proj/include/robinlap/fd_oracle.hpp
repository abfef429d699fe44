#pragma once

// Independent Robin solver built from the quadratic form
//   a[f] = ||grad f||^2 - int alpha |f(x', 0)|^2 dx'
// on the same truncated slab as the spectral solver. The normal direction uses
// linear finite elements on Nd cells (vertices z_j = j H / Nd, lumped mass),
// the tangential directions use the boundary grid nodes with either the
// spectral Laplacian or the second difference. All pieces are real symmetric
// in node space, so the system (A - lambda M) u = M h is Hermitian for real
// lambda (preconditioned CG) and complex symmetric otherwise (COCG).

#include "robinlap/robin.hpp"

#include <Eigen/Dense>

namespace robinlap {

enum class Tangential { spectral, finite_difference };

struct FdOptions {
    Tangential tangential = Tangential::spectral;
    double tolerance = 1e-12;
    int max_iterations = 5000;
    Exec exec = Exec::parallel;
};

class FdRobinOperator {
public:
    FdRobinOperator(const RobinCoefficient& alpha, const SlabGrid& slab, FdOptions options = {});

    const SlabGrid& slab() const noexcept { return slab_; }
    const FdOptions& options() const noexcept { return options_; }
    int vertices() const noexcept { return slab_.levels() + 1; }
    std::size_t size() const noexcept { return slab_.boundary().size() * static_cast<std::size_t>(vertices()); }
    double dz() const noexcept { return slab_.height() / slab_.levels(); }
    /// Vertex heights j H / Nd.
    std::vector<double> heights() const;
    /// Lumped mass per vertex level (dz/2 at the ends, dz inside).
    double mass(int level) const noexcept;

    /// out = (A - lambda M) u, vertex-level major.
    void apply(cplx lambda, std::span<const cplx> u, std::span<cplx> out) const;
    /// Per-mode tridiagonal inverse of the operator without the boundary term.
    void precondition(cplx lambda, std::span<const cplx> r, std::span<cplx> z) const;

    /// Solves (A - lambda M) u = M h for vertex data h. Real lambda uses CG and
    /// throws indefinite-system on non-positive curvature; complex lambda uses
    /// COCG. Throws non-convergence otherwise.
    IterativeResult solve(cplx lambda, std::span<const cplx> h) const;

    /// Dense real matrix of A - lambda M; intended for at most 4096 unknowns.
    Eigen::MatrixXd dense(double lambda) const;

private:
    SlabGrid slab_;
    std::vector<double> alpha_;
    std::vector<double> symbol_;  // tangential -Laplacian per frequency
    FdOptions options_;

    void tangential(std::span<const cplx> level, std::span<cplx> out) const;
};

struct FdOracleResult {
    SlabFunction u;     // at the slab collocation levels
    cvec vertex_values;
    IterativeResult stats;
};

/// h is given at the collocation levels; it is carried to the vertices through
/// its cosine expansion and the solution is returned at cell midpoints.
FdOracleResult fd_robin_oracle(const RobinCoefficient& alpha, const SlabGrid& slab, cplx lambda,
                               const SlabFunction& h, const FdOptions& options = {});

} // namespace robinlap
