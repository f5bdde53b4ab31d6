#include "thresholdopt/grid.hpp"

#include <cmath>
#include <numeric>

namespace thresholdopt {

std::string to_string(Shape s) {
    switch (s) {
        case Shape::interval: return "interval";
        case Shape::square: return "square";
        case Shape::disk: return "disk";
    }
    return "?";
}

DomainSpec DomainSpec::interval(double a, double b, int n) {
    DomainSpec s;
    s.shape = Shape::interval;
    s.a = a;
    s.b = b;
    s.resolution = n;
    s.validate();
    return s;
}

DomainSpec DomainSpec::square(double side, int n) {
    DomainSpec s;
    s.shape = Shape::square;
    s.side = side;
    s.resolution = n;
    s.validate();
    return s;
}

DomainSpec DomainSpec::disk(double radius, int n) {
    DomainSpec s;
    s.shape = Shape::disk;
    s.radius = radius;
    s.resolution = n;
    s.validate();
    return s;
}

void DomainSpec::validate() const {
    // The resolution >= 8 floor is enforced at the build_grid gate.
    if (resolution < 1) throw std::invalid_argument("DomainSpec: resolution must be positive");
    switch (shape) {
        case Shape::interval:
            if (!(a < b)) throw std::invalid_argument("DomainSpec: interval requires a < b");
            break;
        case Shape::square:
            if (!(side > 0)) throw std::invalid_argument("DomainSpec: square side must be > 0");
            break;
        case Shape::disk:
            if (!(radius > 0)) throw std::invalid_argument("DomainSpec: disk radius must be > 0");
            break;
    }
}

Grid::Grid(const DomainSpec& spec) : spec_(spec) {
    spec_.validate();
    const int n = spec_.resolution;
    if (spec_.shape == Shape::interval) {
        h_ = (spec_.b - spec_.a) / n;
        cell_measure_ = h_;
        x0_ = spec_.a;
        y0_ = 0.0;
        ix_.resize(n);
        std::iota(ix_.begin(), ix_.end(), 0);
        iy_.assign(n, 0);
        lookup_.resize(n);
        std::iota(lookup_.begin(), lookup_.end(), 0);
        return;
    }
    if (spec_.shape == Shape::square) {
        h_ = spec_.side / n;
        x0_ = y0_ = 0.0;
    } else {
        h_ = 2.0 * spec_.radius / n;
        x0_ = y0_ = -spec_.radius;
    }
    cell_measure_ = h_ * h_;
    lookup_.assign(static_cast<size_t>(n) * n, -1);
    const double r2 = spec_.radius * spec_.radius;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            if (spec_.shape == Shape::disk) {
                const double x = x0_ + (ix + 0.5) * h_;
                const double y = y0_ + (iy + 0.5) * h_;
                if (x * x + y * y >= r2) continue;
            }
            lookup_[static_cast<size_t>(iy) * n + ix] = static_cast<int>(ix_.size());
            ix_.push_back(ix);
            iy_.push_back(iy);
        }
    }
    if (ix_.empty()) throw std::invalid_argument("Grid: no active cells");
}

bool Grid::active(int ix, int iy) const { return index(ix, iy) >= 0; }

int Grid::index(int ix, int iy) const {
    const int n = spec_.resolution;
    if (ix < 0 || ix >= n) return -1;
    if (dim() == 1) return iy == 0 ? lookup_[ix] : -1;
    if (iy < 0 || iy >= n) return -1;
    return lookup_[static_cast<size_t>(iy) * n + ix];
}

GridPtr build_grid(const DomainSpec& spec) {
    if (spec.resolution < 8) throw std::invalid_argument("build_grid: resolution must be >= 8");
    return std::make_shared<const Grid>(spec);
}

namespace {
void check_finite(std::span<const double> v, const char* who) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(who) + ": non-finite value");
}
}  // namespace

ScalarField::ScalarField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw std::invalid_argument("ScalarField: null grid");
    if (static_cast<int>(values.size()) != grid->active_count())
        throw std::invalid_argument("ScalarField: value count does not match active cells");
    check_finite(values, "ScalarField");
}

ScalarField ScalarField::constant(GridPtr g, double c) {
    const int n = g->active_count();
    return ScalarField(std::move(g), std::vector<double>(n, c));
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

ControlField::ControlField(GridPtr g, std::vector<double> v, double v0)
    : grid(std::move(g)), values(std::move(v)), target_fraction(v0) {
    if (!grid) throw std::invalid_argument("ControlField: null grid");
    if (!(v0 > 0.0 && v0 < 1.0)) throw std::invalid_argument("ControlField: V0 must lie in (0,1)");
    if (static_cast<int>(values.size()) != grid->active_count())
        throw std::invalid_argument("ControlField: value count does not match active cells");
    check_finite(values, "ControlField");
    const double slack = 1e-9;
    for (double x : values)
        if (x < -slack || x > 1.0 + slack)
            throw std::invalid_argument("ControlField: value outside [0,1]");
    const double quantum = 1.0 / grid->active_count();
    if (std::abs(mean() - v0) > quantum + slack)
        throw std::invalid_argument("ControlField: mean deviates from V0 by more than one cell");
}

ControlField ControlField::constant(GridPtr g, double v0) {
    const int n = g->active_count();
    return ControlField(std::move(g), std::vector<double>(n, v0), v0);
}

double ControlField::mean() const {
    double s = 0.0;
    for (double x : values) s += x;
    return s / values.size();
}

bool same_grid(const GridPtr& a, const GridPtr& b) { return a.get() == b.get(); }

double l1_distance(const ControlField& f, const ControlField& g) {
    if (!same_grid(f.grid, g.grid)) throw std::invalid_argument("l1_distance: mismatched grids");
    double s = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) s += std::abs(f.values[i] - g.values[i]);
    return s * f.grid->cell_measure();
}

double integrate(const ScalarField& phi) {
    double s = 0.0;
    for (double v : phi.values) s += v;
    return s * phi.grid->cell_measure();
}

double integrate(const ScalarField& phi, const ControlField& weight) {
    if (!same_grid(phi.grid, weight.grid)) throw std::invalid_argument("integrate: mismatched grids");
    double s = 0.0;
    for (size_t i = 0; i < phi.values.size(); ++i) s += phi.values[i] * weight.values[i];
    return s * phi.grid->cell_measure();
}

}  // namespace thresholdopt
