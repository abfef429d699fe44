#pragma once

#include "robinlap/grid.hpp"

#include <functional>
#include <vector>

namespace robinlap {

/// y = K x on flat complex vectors.
using LinearMap = std::function<cvec(const cvec&)>;

struct IterativeOptions {
    double tolerance = 1e-10;  // on ||residual|| / ||rhs||
    int max_iterations = 500;
    int restart = 40;          // Krylov only
};

struct IterativeResult {
    cvec solution;
    std::vector<double> history;  // relative residual per iteration
    int iterations = 0;
    double residual = 0.0;        // relative, recomputed from the returned solution
};

/// Solves (1 - K) x = b by x <- b + K x. The residual of iterate x is exactly
/// the next increment, so each step costs one application of K.
/// Throws non-convergence (value = last relative residual).
IterativeResult neumann_series(const LinearMap& k, const cvec& b, const IterativeOptions& options);

/// Restarted GMRES for A x = b with modified Gram-Schmidt Arnoldi and Givens
/// rotations. Throws non-convergence (value = last relative residual).
IterativeResult gmres(const LinearMap& a, const cvec& b, const IterativeOptions& options);

} // namespace robinlap
