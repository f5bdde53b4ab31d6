#pragma once

#include <functional>
#include <span>
#include <vector>

#include "thresholdopt/grid.hpp"

namespace thresholdopt {

/// Symmetric sparse matrix in compressed row storage.
struct SparseOperator {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> vals;

    static SparseOperator from_triplets(int n, const std::vector<int>& rows,
                                        const std::vector<int>& cols,
                                        const std::vector<double>& vals);

    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> diagonal() const;
    double entry(int i, int j) const;
    bool is_symmetric(double tol = 0.0) const;

    /// A + s*I
    SparseOperator shifted(double s) const;
    /// A - diag(d)
    SparseOperator minus_diag(std::span<const double> d) const;
};

/// Second-order cell-centered 5/3-point Laplacian with homogeneous Dirichlet
/// conditions on the mask boundary (missing neighbors enter through the
/// reflected ghost value -u, so the diagonal is (2d + m)/h^2 for m missing
/// neighbors).
SparseOperator assemble_dirichlet_laplacian(const Grid& grid);

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
/// Throws SolverError (with the last residual) on non-convergence.
/// max_iter <= 0 selects an automatic cap.
CgResult cg_solve(const SparseOperator& A, std::span<const double> b, double tol = 1e-10,
                  int max_iter = 0);

struct EigenResult {
    double value = 0.0;
    std::vector<double> vector;
    int iterations = 0;
    double residual = 0.0;
};

/// Shifted inverse power iteration for the smallest eigenpair of A.
/// Requires A - shift*I positive definite. The returned vector has unit
/// 2-norm and nonnegative first component.
EigenResult smallest_eigenpair(const SparseOperator& A, double shift, double tol = 1e-10,
                               int max_iter = 500);

using LinearApply = std::function<std::vector<double>(std::span<const double>)>;

struct PencilResult {
    double sigma = 0.0;
    std::vector<double> vector;
    int iterations = 0;
};

/// Power iteration with B-inner-product normalization for the largest
/// eigenvalue sigma of A^{-1} B restricted to the range of B. The inverse is
/// supplied as a functor (typically a CG solve).
PencilResult pencil_largest(const LinearApply& apply_Ainv, const SparseOperator& B,
                            double tol = 1e-10, int max_iter = 20000);

/// B-orthogonal deflated variant returning the m leading modes
/// (sigma non-increasing).
std::vector<PencilResult> pencil_modes(const LinearApply& apply_Ainv, const SparseOperator& B,
                                       int m, double tol = 1e-10, int max_iter = 20000);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace thresholdopt
