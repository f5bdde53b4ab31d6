#include "thresholdopt/pde.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace thresholdopt {

namespace {

struct GridCache {
    std::mutex mu;
    struct Entry {
        std::weak_ptr<const Grid> grid;
        std::shared_ptr<const SparseOperator> laplacian;
        std::shared_ptr<const ScalarField> torsion;
    };
    std::map<const Grid*, Entry> entries;

    Entry& locate(const GridPtr& g) {
        auto& e = entries[g.get()];
        if (e.grid.expired() || e.grid.lock().get() != g.get()) {
            e = Entry{};
            e.grid = g;
        }
        return e;
    }
};

GridCache& cache() {
    static GridCache c;
    return c;
}

}  // namespace

std::shared_ptr<const SparseOperator> dirichlet_laplacian(const GridPtr& grid) {
    auto& c = cache();
    std::scoped_lock lock(c.mu);
    auto& e = c.locate(grid);
    if (!e.laplacian)
        e.laplacian = std::make_shared<const SparseOperator>(assemble_dirichlet_laplacian(*grid));
    return e.laplacian;
}

ScalarField solve_poisson(const ScalarField& rhs, double tol) {
    auto A = dirichlet_laplacian(rhs.grid);
    CgResult r = cg_solve(*A, rhs.values, tol);
    return ScalarField(rhs.grid, std::move(r.x));
}

ScalarField solve_state(const ControlField& f, double tol) {
    return solve_poisson(f.as_scalar(), tol);
}

std::shared_ptr<const ScalarField> torsion(const GridPtr& grid) {
    {
        auto& c = cache();
        std::scoped_lock lock(c.mu);
        auto& e = c.locate(grid);
        if (e.torsion) return e.torsion;
    }
    ScalarField w = solve_poisson(ScalarField::constant(grid, 1.0));
    auto& c = cache();
    std::scoped_lock lock(c.mu);
    auto& e = c.locate(grid);
    if (!e.torsion) e.torsion = std::make_shared<const ScalarField>(std::move(w));
    return e.torsion;
}

EigenPair principal_eigenpair(const ControlField& f, double tol) {
    auto A = dirichlet_laplacian(f.grid);
    const SparseOperator Af = A->minus_diag(f.values);
    EigenResult r = smallest_eigenpair(Af, /*shift=*/-2.0, tol);
    // Perron vector of the discrete operator: one sign everywhere.
    double s = 0.0;
    for (double v : r.vector) s += v;
    if (s < 0.0)
        for (double& v : r.vector) v = -v;
    for (double v : r.vector)
        if (!(v > 0.0))
            throw SolverError("principal_eigenpair: converged mode is not positive (non-principal)");
    // unit L2 norm against the cell measure
    const double scale = 1.0 / std::sqrt(f.grid->cell_measure());
    for (double& v : r.vector) v *= scale;
    EigenPair out{r.value, ScalarField(f.grid, std::move(r.vector)), r.iterations, r.residual};
    return out;
}

ScalarField solve_adjoint(const ScalarField& u, const JSpec& j, double tol) {
    std::vector<double> rhs(u.values.size());
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = j.d1(u.values[i]);
    return solve_poisson(ScalarField(u.grid, std::move(rhs)), tol);
}

}  // namespace thresholdopt
