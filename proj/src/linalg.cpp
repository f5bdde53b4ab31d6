#include "thresholdopt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace thresholdopt {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SparseOperator SparseOperator::from_triplets(int n, const std::vector<int>& rows,
                                             const std::vector<int>& cols,
                                             const std::vector<double>& v) {
    std::map<std::pair<int, int>, double> acc;
    for (size_t k = 0; k < v.size(); ++k) acc[{rows[k], cols[k]}] += v[k];
    SparseOperator A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (const auto& [ij, val] : acc) A.row_ptr[ij.first + 1]++;
    for (int i = 0; i < n; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
    A.col_idx.resize(acc.size());
    A.vals.resize(acc.size());
    std::vector<int> cursor(A.row_ptr.begin(), A.row_ptr.end() - 1);
    for (const auto& [ij, val] : acc) {
        const int p = cursor[ij.first]++;
        A.col_idx[p] = ij.second;
        A.vals[p] = val;
    }
    return A;
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += vals[p] * x[col_idx[p]];
        y[i] = s;
    }
}

std::vector<double> SparseOperator::apply(std::span<const double> x) const {
    std::vector<double> y(n);
    apply(x, y);
    return y;
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            if (col_idx[p] == i) d[i] = vals[p];
    return d;
}

double SparseOperator::entry(int i, int j) const {
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
        if (col_idx[p] == j) return vals[p];
    return 0.0;
}

bool SparseOperator::is_symmetric(double tol) const {
    for (int i = 0; i < n; ++i)
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            if (std::abs(vals[p] - entry(col_idx[p], i)) > tol) return false;
    return true;
}

SparseOperator SparseOperator::shifted(double s) const {
    SparseOperator A = *this;
    for (int i = 0; i < n; ++i) {
        bool found = false;
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
            if (A.col_idx[p] == i) {
                A.vals[p] += s;
                found = true;
            }
        if (!found) throw std::invalid_argument("shifted: matrix lacks a stored diagonal");
    }
    return A;
}

SparseOperator SparseOperator::minus_diag(std::span<const double> d) const {
    SparseOperator A = *this;
    for (int i = 0; i < n; ++i)
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p)
            if (A.col_idx[p] == i) A.vals[p] -= d[i];
    return A;
}

SparseOperator assemble_dirichlet_laplacian(const Grid& grid) {
    const int N = grid.active_count();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    std::vector<int> rows, cols;
    std::vector<double> vals;
    rows.reserve(5 * N);
    cols.reserve(5 * N);
    vals.reserve(5 * N);
    const int pairs = grid.dim();
    for (int k = 0; k < N; ++k) {
        const int ix = grid.ix_of(k), iy = grid.iy_of(k);
        double diag = 0.0;
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int s = 0; s < 2 * pairs; ++s) {
            const int nb = grid.index(ix + di[s], iy + dj[s]);
            if (nb >= 0) {
                rows.push_back(k);
                cols.push_back(nb);
                vals.push_back(-inv_h2);
                diag += inv_h2;
            } else {
                // reflected ghost: (u - (-u))/h^2
                diag += 2.0 * inv_h2;
            }
        }
        rows.push_back(k);
        cols.push_back(k);
        vals.push_back(diag);
    }
    return SparseOperator::from_triplets(N, rows, cols, vals);
}

CgResult cg_solve(const SparseOperator& A, std::span<const double> b, double tol, int max_iter) {
    const int n = A.n;
    if (max_iter <= 0) max_iter = std::max(1000, 20 * n);
    CgResult out;
    out.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return out;  // x = 0 exactly

    std::vector<double> d = A.diagonal();
    for (double& v : d) v = (v > 0.0) ? 1.0 / v : 1.0;

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n), p(n), Ap(n);
    for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double rnorm = norm2(r);
    for (int it = 1; it <= max_iter; ++it) {
        A.apply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) {
            std::ostringstream os;
            os << "cg_solve: operator not positive definite (p'Ap=" << pAp << " at iteration "
               << it << ")";
            throw SolverError(os.str());
        }
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        rnorm = norm2(r);
        out.iterations = it;
        if (rnorm <= tol * bnorm) {
            out.relative_residual = rnorm / bnorm;
            return out;
        }
        for (int i = 0; i < n; ++i) z[i] = d[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    std::ostringstream os;
    os << "cg_solve: no convergence after " << max_iter << " iterations (relative residual "
       << rnorm / bnorm << ")";
    throw SolverError(os.str());
}

EigenResult smallest_eigenpair(const SparseOperator& A, double shift, double tol, int max_iter) {
    const int n = A.n;
    SparseOperator M = A.shifted(-shift);
    EigenResult out;
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lam_prev = 0.0;
    const double cg_tol = std::min(1e-12, tol * 1e-2);
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> y = cg_solve(M, v, cg_tol).x;
        const double ynorm = norm2(y);
        if (!(ynorm > 0.0)) throw SolverError("smallest_eigenpair: iteration collapsed to zero");
        for (double& t : y) t /= ynorm;
        std::vector<double> Ay = A.apply(y);
        const double lam = dot(y, Ay);
        double res = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = Ay[i] - lam * y[i];
            res += d * d;
        }
        res = std::sqrt(res);
        v = std::move(y);
        out.value = lam;
        out.iterations = it;
        out.residual = res;
        if (it > 1 && std::abs(lam - lam_prev) <= 1e-12 * std::abs(lam) && res <= tol) break;
        lam_prev = lam;
        if (it == max_iter) {
            std::ostringstream os;
            os << "smallest_eigenpair: no convergence after " << max_iter
               << " iterations (residual " << res << ")";
            throw SolverError(os.str());
        }
    }
    if (v[0] < 0.0)
        for (double& t : v) t = -t;
    out.vector = std::move(v);
    return out;
}

namespace {

void b_orthogonalize(std::vector<double>& x, const SparseOperator& B,
                     const std::vector<std::vector<double>>& basis) {
    for (const auto& q : basis) {
        const std::vector<double> Bq = B.apply(q);
        const double c = dot(x, Bq);  // basis is B-orthonormal
        for (size_t i = 0; i < x.size(); ++i) x[i] -= c * q[i];
    }
}

PencilResult pencil_one(const LinearApply& apply_Ainv, const SparseOperator& B, double tol,
                        int max_iter, const std::vector<std::vector<double>>& deflate) {
    const int n = B.n;
    std::vector<double> ones(n, 1.0);
    std::vector<double> Bx = B.apply(ones);
    if (norm2(Bx) == 0.0) throw std::invalid_argument("pencil_largest: B is zero");
    std::vector<double> x = apply_Ainv(Bx);
    b_orthogonalize(x, B, deflate);
    PencilResult out;
    double sigma_prev = 0.0;
    int confirmations = 0;
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> y = B.apply(x);
        const double nb = dot(x, y);
        if (!(nb > 0.0))
            throw SolverError("pencil_largest: iterate left the range of B (stagnation)");
        const double s = 1.0 / std::sqrt(nb);
        for (int i = 0; i < n; ++i) {
            x[i] *= s;
            y[i] *= s;
        }
        std::vector<double> w = apply_Ainv(y);
        const double sigma = dot(y, w);
        out.sigma = sigma;
        out.iterations = it;
        if (it > 2 && std::abs(sigma - sigma_prev) <= tol * std::abs(sigma)) {
            if (++confirmations >= 2) {
                out.vector = std::move(x);
                return out;
            }
        } else {
            confirmations = 0;
        }
        sigma_prev = sigma;
        x = std::move(w);
        b_orthogonalize(x, B, deflate);
    }
    std::ostringstream os;
    os << "pencil_largest: stagnation after " << max_iter << " iterations (sigma " << out.sigma
       << ")";
    throw SolverError(os.str());
}

}  // namespace

PencilResult pencil_largest(const LinearApply& apply_Ainv, const SparseOperator& B, double tol,
                            int max_iter) {
    return pencil_one(apply_Ainv, B, tol, max_iter, {});
}

std::vector<PencilResult> pencil_modes(const LinearApply& apply_Ainv, const SparseOperator& B,
                                       int m, double tol, int max_iter) {
    std::vector<PencilResult> modes;
    std::vector<std::vector<double>> basis;
    for (int k = 0; k < m; ++k) {
        PencilResult r = pencil_one(apply_Ainv, B, tol, max_iter, basis);
        basis.push_back(r.vector);
        modes.push_back(std::move(r));
    }
    return modes;
}

}  // namespace thresholdopt
