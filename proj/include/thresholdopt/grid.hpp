#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace thresholdopt {

/// Thrown when an iterative solver fails to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

enum class Shape { interval, square, disk };

std::string to_string(Shape s);

/// Geometry request: which domain, and how many cells per axis.
struct DomainSpec {
    Shape shape = Shape::square;
    int resolution = 64;
    double a = -1.0;      // interval endpoints
    double b = 1.0;
    double side = 1.0;    // square side length
    double radius = 1.0;  // disk radius

    static DomainSpec interval(double a, double b, int n);
    static DomainSpec square(double side, int n);
    static DomainSpec disk(double radius, int n);

    int dim() const { return shape == Shape::interval ? 1 : 2; }
    void validate() const;  // throws std::invalid_argument
};

/// Uniform cell-centered grid over the domain's bounding box with an
/// interior mask. Active cells are exactly those whose center lies strictly
/// inside the domain. Immutable after construction.
class Grid {
public:
    explicit Grid(const DomainSpec& spec);

    const DomainSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim(); }
    double h() const { return h_; }
    int cells_per_axis() const { return spec_.resolution; }
    int active_count() const { return static_cast<int>(ix_.size()); }
    double cell_measure() const { return cell_measure_; }
    double total_measure() const { return cell_measure_ * active_count(); }

    bool active(int ix, int iy = 0) const;
    /// Linear index of an active cell, -1 for inactive/out-of-range.
    int index(int ix, int iy = 0) const;
    int ix_of(int k) const { return ix_[k]; }
    int iy_of(int k) const { return iy_[k]; }
    double x_of(int k) const { return x0_ + (ix_[k] + 0.5) * h_; }
    double y_of(int k) const { return dim() == 1 ? 0.0 : y0_ + (iy_[k] + 0.5) * h_; }
    double origin_x() const { return x0_; }
    double origin_y() const { return y0_; }

private:
    DomainSpec spec_;
    double h_ = 0.0;
    double cell_measure_ = 0.0;
    double x0_ = 0.0, y0_ = 0.0;  // lower-left corner of the bounding box
    std::vector<int> ix_, iy_;    // per active cell
    std::vector<int> lookup_;     // (iy*n + ix) -> active index or -1
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(const DomainSpec& spec);

/// Real values attached to the active cells of a grid.
struct ScalarField {
    GridPtr grid;
    std::vector<double> values;

    ScalarField(GridPtr g, std::vector<double> v);
    static ScalarField constant(GridPtr g, double c);

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int k) { return values[k]; }
    double operator[](int k) const { return values[k]; }
    double max_abs() const;
};

/// A control: cell values in [0,1] whose mean matches the prescribed
/// volume fraction up to one cell of quantization.
struct ControlField {
    GridPtr grid;
    std::vector<double> values;
    double target_fraction;

    ControlField(GridPtr g, std::vector<double> v, double v0);
    static ControlField constant(GridPtr g, double v0);

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int k) const { return values[k]; }
    double mean() const;
    ScalarField as_scalar() const { return ScalarField(grid, values); }
};

bool same_grid(const GridPtr& a, const GridPtr& b);

/// sum_i |f_i - g_i| h^d
double l1_distance(const ControlField& f, const ControlField& g);

/// Midpoint-rule integral, optionally weighted by a control.
double integrate(const ScalarField& phi);
double integrate(const ScalarField& phi, const ControlField& weight);

}  // namespace thresholdopt
