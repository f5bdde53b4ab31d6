#pragma once

#include <array>
#include <string>
#include <vector>

#include "thresholdopt/grid.hpp"
#include "thresholdopt/linalg.hpp"
#include "thresholdopt/objectives.hpp"

namespace thresholdopt {

/// Signals a flat level set: some quadrature point saw |∇u| below the
/// degeneracy threshold, so the stability machinery does not apply.
class DegenerateLevelSet : public SolverError {
public:
    using SolverError::SolverError;
};

/// One quadrature point of the discretized interface: position, interpolated
/// gradient magnitude, arc-length weight, and the interpolation stencil
/// (active cells with their shape weights).
struct QuadPoint {
    double x = 0.0, y = 0.0;
    double grad_mag = 0.0;
    double arc_weight = 0.0;
    std::array<int, 2> cells = {-1, -1};
    std::array<double, 2> weights = {0.0, 0.0};
};

struct LevelCurve {
    GridPtr grid;
    double level = 0.0;
    std::vector<QuadPoint> points;
    /// 2D chords as (x1,y1,x2,y2); empty in 1D (points are the interface).
    std::vector<std::array<double, 4>> segments;
    double total_length = 0.0;  // counting measure (#points) in 1D
};

/// Extracts {u = μ} where μ realizes the volume constraint against the
/// piecewise-linear reconstruction: root bracketing with an exact-volume
/// level in 1D, marching squares with a rank-interpolated quantile level in
/// 2D. Gradients are central differences (odd reflection across the mask
/// boundary) interpolated to the curve. Aborts with DegenerateLevelSet when
/// any quadrature gradient falls below 1e-8·max|∇u|.
LevelCurve extract_level_curve(const ScalarField& u, double v0);

enum class BoundaryWeight { rho_E, unweighted };

/// Symmetric PSD boundary mass operator: v'Bw ≈ ∫_{∂E} ρ v w ds, assembled
/// from the outer products of the quadrature shape weights. rho_E uses
/// ρ = 1/|∇u| (= -1/∂_ν u on the outward side).
SparseOperator boundary_mass(const LevelCurve& curve, const Grid& grid, BoundaryWeight weight);

struct StabilityReport {
    double lambda0 = 0.0;
    std::vector<double> eigenvalues;  // nondecreasing, starts at lambda0
    double coercivity_bound = 0.0;    // 1 - 1/lambda0
    bool stable = false;              // lambda0 > 1
    double boundary_measure = 0.0;
    double level = 0.0;
    int pencil_iterations = 0;
    std::vector<std::vector<double>> eigenvectors;  // B-orthonormal
};

/// λ0 = 1/σ0 with σ0 the largest eigenvalue of (h^d A)^{-1} B, i.e. the
/// discrete Rayleigh quotient min ∫|∇v|² / ∫_{∂E} ρ v². n_modes > 1 adds
/// deflated higher modes.
StabilityReport steklov_lambda0(const GridPtr& grid, const LevelCurve& curve, int n_modes = 1,
                                double tol = 1e-10);

struct CoercivityRow {
    double v0 = 0.0;
    double lambda0 = 0.0;
    double coercivity_bound = 0.0;
    bool stable = false;
    std::string status;  // run status, or the failure reason
    int iterations = 0;
    double objective = 0.0;
};

/// For each V0: run the thresholding loop, extract the critical level curve
/// from the converged switch field, and report λ0 and the coercivity bound.
/// Non-converged runs are recorded with their status, never dropped.
std::vector<CoercivityRow> coercivity_profile(const ObjectiveSpec& obj, const DomainSpec& domain,
                                              std::span<const double> v0_list,
                                              double tol = 1e-6, int max_iter = 500);

}  // namespace thresholdopt
