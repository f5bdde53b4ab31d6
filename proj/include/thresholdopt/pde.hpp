#pragma once

#include "thresholdopt/grid.hpp"
#include "thresholdopt/linalg.hpp"
#include "thresholdopt/objectives.hpp"

namespace thresholdopt {

/// Discrete solution of -Δu = f, u = 0 on the boundary.
ScalarField solve_state(const ControlField& f, double tol = 1e-12);

/// Poisson solve with an arbitrary right-hand side field.
ScalarField solve_poisson(const ScalarField& rhs, double tol = 1e-12);

/// Torsion function (-Δw = 1), cached per grid.
std::shared_ptr<const ScalarField> torsion(const GridPtr& grid);

/// Shared per-grid Laplacian; assembled once.
std::shared_ptr<const SparseOperator> dirichlet_laplacian(const GridPtr& grid);

struct EigenPair {
    double value = 0.0;
    ScalarField function;  // positive, normalized to ∫ η² = 1
    int iterations = 0;
    double residual = 0.0;
};

/// Principal eigenpair of -Δ - f via shifted inverse power iteration
/// (fixed shift -2, SPD by f ≤ 1 and positivity of the Laplacian).
/// Positivity of the eigenfunction is enforced by sign flip and then
/// asserted; a violation is a hard error.
EigenPair principal_eigenpair(const ControlField& f, double tol = 1e-10);

/// Adjoint state of the non-energetic criterion: -Δp = ∂_u j(u).
ScalarField solve_adjoint(const ScalarField& u, const JSpec& j, double tol = 1e-12);

}  // namespace thresholdopt
