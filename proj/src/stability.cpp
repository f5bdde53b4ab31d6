#include "thresholdopt/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "thresholdopt/pde.hpp"
#include "thresholdopt/threshold_loop.hpp"

namespace thresholdopt {

namespace {

// cell value with homogeneous Dirichlet ghosts (0 outside the mask)
double cell_or_zero(const Grid& g, const ScalarField& u, int ix, int iy) {
    const int k = g.index(ix, iy);
    return k >= 0 ? u[k] : 0.0;
}

// central differences; odd reflection (ghost = -u) across the mask boundary
void gradients(const ScalarField& u, std::vector<double>& gx, std::vector<double>& gy) {
    const Grid& g = *u.grid;
    const int N = g.active_count();
    const double inv2h = 1.0 / (2.0 * g.h());
    gx.assign(N, 0.0);
    gy.assign(N, 0.0);
    for (int k = 0; k < N; ++k) {
        const int ix = g.ix_of(k), iy = g.iy_of(k);
        auto val = [&](int i, int j) {
            const int q = g.index(i, j);
            return q >= 0 ? u[q] : -u[k];
        };
        gx[k] = (val(ix + 1, iy) - val(ix - 1, iy)) * inv2h;
        if (g.dim() == 2) gy[k] = (val(ix, iy + 1) - val(ix, iy - 1)) * inv2h;
    }
}

// measure of { PL reconstruction of u > mu } in 1D (centers plus zero walls)
double pl_measure_above_1d(const ScalarField& u, double mu) {
    const Grid& g = *u.grid;
    const int N = g.active_count();
    const double h = g.h();
    double total = 0.0;
    auto seg = [&](double va, double vb, double w) {
        const double a = va - mu, b = vb - mu;
        if (a > 0 && b > 0) total += w;
        else if (a > 0 || b > 0) {
            const double t = a / (a - b);
            total += w * (a > 0 ? t : 1.0 - t);
        }
    };
    seg(0.0, u[0], h / 2.0);  // wall to first center
    for (int k = 0; k + 1 < N; ++k) seg(u[k], u[k + 1], h);
    seg(u[N - 1], 0.0, h / 2.0);
    return total;
}

double exact_volume_level_1d(const ScalarField& u, double v0) {
    const double target = v0 * u.grid->total_measure();
    double lo = 0.0, hi = *std::max_element(u.values.begin(), u.values.end());
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (pl_measure_above_1d(u, mid) > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// fractional-rank interpolated quantile of the cell values
double rank_level(const ScalarField& u, double v0) {
    const int N = u.size();
    std::vector<double> vs(u.values);
    std::sort(vs.begin(), vs.end(), std::greater<double>());
    const double t = v0 * N;
    int i0 = static_cast<int>(std::floor(t));
    i0 = std::clamp(i0, 1, N - 1);
    const double frac = std::clamp(t - i0, 0.0, 1.0);
    const double v_lo = vs[i0 - 1];
    const double v_hi = vs[i0];
    return v_lo + frac * (v_hi - v_lo);
}

struct CurveBuilder {
    const Grid& g;
    const ScalarField& u;
    const std::vector<double>& gx;
    const std::vector<double>& gy;
    double mu;
    LevelCurve curve;
    double gmax = 0.0;

    void add_point(double x, double y, std::array<int, 2> cells, std::array<double, 2> w,
                   double arc) {
        QuadPoint p;
        p.x = x;
        p.y = y;
        p.cells = cells;
        p.weights = w;
        p.arc_weight = arc;
        double gxx = 0.0, gyy = 0.0, wsum = 0.0;
        for (int s = 0; s < 2; ++s) {
            if (cells[s] < 0) continue;
            gxx += w[s] * gx[cells[s]];
            gyy += w[s] * gy[cells[s]];
            wsum += w[s];
        }
        // gradient taken from active cells only (renormalized near the mask)
        if (wsum > 0.0) {
            gxx /= wsum;
            gyy /= wsum;
        }
        p.grad_mag = std::hypot(gxx, gyy);
        if (p.grad_mag < 1e-8 * gmax) {
            std::ostringstream os;
            os << "extract_level_curve: |grad u| = " << p.grad_mag << " at (" << x << "," << y
               << ") below 1e-8 * max |grad u| = " << 1e-8 * gmax << " (flat level set)";
            throw DegenerateLevelSet(os.str());
        }
        curve.points.push_back(p);
    }
};

void extract_1d(CurveBuilder& b) {
    const Grid& g = b.g;
    const int N = g.active_count();
    const double h = g.h();
    const double x0 = g.origin_x();
    auto emit = [&](double x, std::array<int, 2> cells, std::array<double, 2> w) {
        b.add_point(x, 0.0, cells, w, 1.0);  // counting measure on the two interface points
        b.curve.total_length += 1.0;
    };
    // wall-to-center half segments, then center-to-center segments
    {
        const double d0 = 0.0 - b.mu, d1 = b.u[0] - b.mu;
        if (d0 * d1 < 0.0) {
            const double t = d0 / (d0 - d1);  // from the wall
            emit(x0 + t * h / 2.0, {0, -1}, {t, 0.0});
        }
    }
    for (int k = 0; k + 1 < N; ++k) {
        const double d0 = b.u[k] - b.mu, d1 = b.u[k + 1] - b.mu;
        if (d0 == 0.0) {
            emit(g.x_of(k), {k, k + 1}, {1.0, 0.0});
        } else if (d0 * d1 < 0.0) {
            const double t = d0 / (d0 - d1);
            emit(g.x_of(k) + t * h, {k, k + 1}, {1.0 - t, t});
        }
    }
    {
        const double d0 = b.u[N - 1] - b.mu, d1 = 0.0 - b.mu;
        if (d0 == 0.0) emit(g.x_of(N - 1), {N - 1, -1}, {1.0, 0.0});
        else if (d0 * d1 < 0.0) {
            const double t = d0 / (d0 - d1);
            emit(g.x_of(N - 1) + t * h / 2.0, {N - 1, -1}, {1.0 - t, 0.0});
        }
    }
}

void extract_2d(CurveBuilder& b) {
    const Grid& g = b.g;
    const int n = g.cells_per_axis();
    const double h = g.h();
    const double cx = g.origin_x() + 0.5 * h;  // position of corner (0,0) = cell center
    const double cy = g.origin_y() + 0.5 * h;

    struct Crossing {
        double x, y;
        std::array<int, 2> cells;
        std::array<double, 2> w;
    };

    for (int i = -1; i < n; ++i) {
        for (int j = -1; j < n; ++j) {
            const int ci[4] = {i, i + 1, i + 1, i};
            const int cj[4] = {j, j, j + 1, j + 1};
            double v[4];
            int idx[4];
            bool any_active = false;
            for (int c = 0; c < 4; ++c) {
                idx[c] = g.index(ci[c], cj[c]);
                v[c] = idx[c] >= 0 ? b.u[idx[c]] : 0.0;
                any_active |= idx[c] >= 0;
            }
            if (!any_active) continue;
            bool above[4];
            int n_above = 0;
            for (int c = 0; c < 4; ++c) {
                above[c] = v[c] > b.mu;
                n_above += above[c];
            }
            if (n_above == 0 || n_above == 4) continue;

            std::vector<std::pair<int, Crossing>> crossings;  // (edge id, point)
            for (int e = 0; e < 4; ++e) {
                const int a = e, c2 = (e + 1) % 4;
                if (above[a] == above[c2]) continue;
                const double t = (b.mu - v[a]) / (v[c2] - v[a]);
                Crossing cr;
                cr.x = cx + (ci[a] + t * (ci[c2] - ci[a])) * h;
                cr.y = cy + (cj[a] + t * (cj[c2] - cj[a])) * h;
                cr.cells = {idx[a], idx[c2]};
                cr.w = {1.0 - t, t};
                crossings.emplace_back(e, cr);
            }
            std::vector<std::pair<Crossing, Crossing>> chords;
            if (crossings.size() == 2) {
                chords.emplace_back(crossings[0].second, crossings[1].second);
            } else if (crossings.size() == 4) {
                // saddle: connect by the sign of the center average
                const double cavg = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                if ((cavg > b.mu) == above[0]) {
                    chords.emplace_back(crossings[0].second, crossings[3].second);
                    chords.emplace_back(crossings[1].second, crossings[2].second);
                } else {
                    chords.emplace_back(crossings[0].second, crossings[1].second);
                    chords.emplace_back(crossings[2].second, crossings[3].second);
                }
            }
            for (const auto& [p, q] : chords) {
                const double len = std::hypot(q.x - p.x, q.y - p.y);
                if (len == 0.0) continue;
                b.curve.segments.push_back({p.x, p.y, q.x, q.y});
                b.curve.total_length += len;
                b.add_point(p.x, p.y, p.cells, p.w, 0.5 * len);
                b.add_point(q.x, q.y, q.cells, q.w, 0.5 * len);
            }
        }
    }
}

}  // namespace

LevelCurve extract_level_curve(const ScalarField& u, double v0) {
    if (!(v0 > 0.0 && v0 < 1.0))
        throw std::invalid_argument("extract_level_curve: V0 must be in (0,1)");
    const Grid& g = *u.grid;
    std::vector<double> gx, gy;
    gradients(u, gx, gy);
    double gmax = 0.0;
    for (size_t k = 0; k < gx.size(); ++k) gmax = std::max(gmax, std::hypot(gx[k], gy[k]));

    CurveBuilder b{g, u, gx, gy,
                   g.dim() == 1 ? exact_volume_level_1d(u, v0) : rank_level(u, v0),
                   LevelCurve{}, gmax};
    b.curve.grid = u.grid;
    b.curve.level = b.mu;
    if (g.dim() == 1) extract_1d(b);
    else extract_2d(b);
    if (b.curve.points.empty())
        throw DegenerateLevelSet("extract_level_curve: empty level curve");
    return b.curve;
}

SparseOperator boundary_mass(const LevelCurve& curve, const Grid& grid, BoundaryWeight weight) {
    if (curve.points.empty()) throw std::invalid_argument("boundary_mass: empty curve");
    std::vector<int> rows, cols;
    std::vector<double> vals;
    for (const QuadPoint& p : curve.points) {
        const double rho = weight == BoundaryWeight::rho_E ? 1.0 / p.grad_mag : 1.0;
        const double w = rho * p.arc_weight;
        for (int a = 0; a < 2; ++a) {
            if (p.cells[a] < 0 || p.weights[a] == 0.0) continue;
            for (int c = 0; c < 2; ++c) {
                if (p.cells[c] < 0 || p.weights[c] == 0.0) continue;
                rows.push_back(p.cells[a]);
                cols.push_back(p.cells[c]);
                vals.push_back(w * p.weights[a] * p.weights[c]);
            }
        }
    }
    return SparseOperator::from_triplets(grid.active_count(), rows, cols, vals);
}

StabilityReport steklov_lambda0(const GridPtr& grid, const LevelCurve& curve, int n_modes,
                                double tol) {
    auto A = dirichlet_laplacian(grid);
    const SparseOperator B = boundary_mass(curve, *grid, BoundaryWeight::rho_E);
    const double hd = grid->cell_measure();
    LinearApply apply_Ainv = [&](std::span<const double> y) {
        std::vector<double> x = cg_solve(*A, y, 1e-12).x;
        for (double& v : x) v /= hd;  // (h^d A)^{-1}
        return x;
    };
    std::vector<PencilResult> modes = pencil_modes(apply_Ainv, B, std::max(1, n_modes), tol);

    StabilityReport rep;
    rep.level = curve.level;
    rep.boundary_measure = curve.total_length;
    rep.pencil_iterations = modes.front().iterations;
    for (const auto& m : modes) {
        rep.eigenvalues.push_back(1.0 / m.sigma);
        rep.eigenvectors.push_back(m.vector);
    }
    rep.lambda0 = rep.eigenvalues.front();
    rep.coercivity_bound = 1.0 - 1.0 / rep.lambda0;
    rep.stable = rep.lambda0 > 1.0;
    return rep;
}

std::vector<CoercivityRow> coercivity_profile(const ObjectiveSpec& obj, const DomainSpec& domain,
                                              std::span<const double> v0_list, double tol,
                                              int max_iter) {
    std::vector<CoercivityRow> rows;
    for (double v0 : v0_list) {
        CoercivityRow row;
        row.v0 = v0;
        try {
            RunConfig cfg;
            cfg.objective = obj;
            cfg.domain = domain;
            cfg.v0 = v0;
            cfg.tolerance = tol;
            cfg.max_iter = max_iter;
            RunResult res = run(cfg);
            row.status = to_string(res.trace.status);
            row.iterations = res.trace.iterations;
            row.objective = res.trace.final_objective;
            if (res.trace.status == RunStatus::converged) {
                const ScalarField q = switch_field(obj, res.f_final);
                const LevelCurve curve = extract_level_curve(q, v0);
                const StabilityReport rep = steklov_lambda0(res.f_final.grid, curve);
                row.lambda0 = rep.lambda0;
                row.coercivity_bound = rep.coercivity_bound;
                row.stable = rep.stable;
            }
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace thresholdopt
