#pragma once

#include <span>
#include <vector>

#include "thresholdopt/grid.hpp"

namespace thresholdopt {

enum class JKind { quadratic, exponential, tabulated };

/// Integrand j(u) for the non-energetic criterion. Must be strictly convex
/// and increasing on the attainable state range (0, u_max]; this is sampled
/// numerically at construction.
class JSpec {
public:
    static JSpec quadratic(double u_max = 1.0);
    static JSpec exponential(double u_max = 1.0);
    /// Natural cubic spline through (u_knots, j_values); linear extrapolation
    /// outside the knot range.
    static JSpec tabulated(std::vector<double> u_knots, std::vector<double> j_values);

    JKind kind() const { return kind_; }
    double value(double u) const;
    double d1(double u) const;
    double d2(double u) const;

    /// Sample H_j on (0, u_max]: d1 > 0 and d2 > 0 at 100 points; throws.
    void verify_hypotheses(double u_max) const;

private:
    JSpec() = default;
    JKind kind_ = JKind::quadratic;
    // spline data (tabulated kind)
    std::vector<double> knots_, coef_a_, coef_b_, coef_c_, coef_d_;
    int find_interval(double u) const;
};

enum class Objective { dirichlet_energy, eigenvalue, nonenergetic };
enum class Sense { minimize, maximize };

std::string to_string(Objective o);

struct ObjectiveSpec {
    Objective kind = Objective::dirichlet_energy;
    JSpec j = JSpec::quadratic();  // used by nonenergetic only

    Sense sense() const {
        return kind == Objective::nonenergetic ? Sense::maximize : Sense::minimize;
    }
};

struct Evaluation {
    double value = 0.0;
    ScalarField state;         // u_f (dirichlet, nonenergetic) or eigenfunction
    ScalarField switch_field;  // field whose superlevel set the algorithm thresholds
};

/// Objective value, its state, and the switch function in one pass
/// (the PDE solves are shared).
Evaluation evaluate_with_switch(const ObjectiveSpec& obj, const ControlField& f);

std::pair<double, ScalarField> evaluate(const ObjectiveSpec& obj, const ControlField& f);

/// Orientation is always "larger is selected": u_f for the Dirichlet energy,
/// the principal eigenfunction for the eigenvalue (same superlevel sets as
/// its square), the adjoint p_f for the non-energetic criterion.
ScalarField switch_field(const ObjectiveSpec& obj, const ControlField& f);

struct GradientCheckRow {
    double t = 0.0;
    double finite_difference = 0.0;
    double predicted = 0.0;
    double mismatch = 0.0;
};

struct GradientCheckReport {
    std::vector<GradientCheckRow> rows;
    double predicted_slope = 0.0;
    double observed_order = 0.0;  // least-squares slope of log(mismatch) vs log(t)
};

/// Compares finite differences (G(f+th)-G(f))/t against the switch-function
/// prediction. The direction h must have zero mean and keep f + t*h inside
/// [0,1] for every tested t.
GradientCheckReport gradient_check(const ObjectiveSpec& obj, const ControlField& f,
                                   const ScalarField& h, std::span<const double> steps);

}  // namespace thresholdopt
