// Independent reference computations used by the test suites. Everything in
// here is deliberately implemented with different algorithms than the library
// (dense elimination, cyclic Jacobi, analytic series) so the checks do not
// share a code path with what they verify.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "thresholdopt/linalg.hpp"

namespace oracles {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Matrix A, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        if (A[c][c] == 0.0) throw std::runtime_error("dense_solve: singular");
        for (int r = c + 1; r < n; ++r) {
            const double m = A[r][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r][k] -= m * A[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

// Eigenvalues of a symmetric dense matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(Matrix A) {
    const int n = static_cast<int>(A.size());
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A[p][q] * A[p][q];
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (A[p][q] == 0.0) continue;
                const double theta = 0.5 * std::atan2(2.0 * A[p][q], A[q][q] - A[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    const double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Lower-triangular Cholesky factor.
inline Matrix cholesky(const Matrix& A) {
    const int n = static_cast<int>(A.size());
    Matrix L(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = A[i][j];
            for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("cholesky: not SPD");
                L[i][i] = std::sqrt(s);
            } else {
                L[i][j] = s / L[j][j];
            }
        }
    return L;
}

// Largest eigenvalue of A^{-1} B for dense SPD A, symmetric PSD B, computed
// via the similar symmetric matrix L^{-1} B L^{-T} and Jacobi.
inline double pencil_largest_dense(const Matrix& A, const Matrix& B) {
    const int n = static_cast<int>(A.size());
    const Matrix L = cholesky(A);
    // Y = L^{-1} B  (forward substitutions per column), then C = Y L^{-T}
    Matrix Y(n, std::vector<double>(n));
    for (int col = 0; col < n; ++col)
        for (int i = 0; i < n; ++i) {
            double s = B[i][col];
            for (int k = 0; k < i; ++k) s -= L[i][k] * Y[k][col];
            Y[i][col] = s / L[i][i];
        }
    Matrix C(n, std::vector<double>(n));
    for (int row = 0; row < n; ++row)
        for (int i = 0; i < n; ++i) {
            double s = Y[row][i];
            for (int k = 0; k < i; ++k) s -= L[i][k] * C[row][k];
            C[row][i] = s / L[i][i];
        }
    return jacobi_eigenvalues(C).back();
}

inline thresholdopt::SparseOperator to_sparse(const Matrix& A) {
    const int n = static_cast<int>(A.size());
    std::vector<int> rows, cols;
    std::vector<double> vals;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (A[i][j] != 0.0) {
                rows.push_back(i);
                cols.push_back(j);
                vals.push_back(A[i][j]);
            }
    return thresholdopt::SparseOperator::from_triplets(n, rows, cols, vals);
}

inline Matrix random_spd(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Matrix M(n, std::vector<double>(n));
    for (auto& row : M)
        for (double& v : row) v = uni(rng);
    Matrix A(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) A[i][j] += M[k][i] * M[k][j];
            if (i == j) A[i][j] += n;  // well-conditioned
        }
    return A;
}

// Torsion function of the unit square at the center, from the rapidly
// convergent single series w(1/2,1/2) = 1/8 - (4/pi^3) sum_k odd
// (-1)^((k-1)/2) / (k^3 cosh(k pi/2)); equals 0.07367135328151 to 14 digits.
inline double unit_square_torsion_center() {
    double tot = 0.0;
    for (int k = 1; k < 60; k += 2) {
        const double sign = ((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
        tot += sign / (k * k * k * std::cosh(k * M_PI / 2.0));
    }
    return 0.125 - 4.0 / (M_PI * M_PI * M_PI) * tot;
}

// Exact smallest eigenvalue of the discrete cell-centered Dirichlet
// Laplacian on a full rectangle of n x n cells with spacing h.
inline double discrete_square_lambda1(int n, double h, int dim) {
    const double s = std::sin(M_PI * h / 2.0 * n / n);  // argument pi*h/(2L), L = n*h
    (void)s;
    const double per_axis = 4.0 / (h * h) * std::pow(std::sin(M_PI / (2.0 * n)), 2);
    return dim * per_axis;
}

}  // namespace oracles
