#include "thresholdopt/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "thresholdopt/pde.hpp"

namespace thresholdopt {

std::string to_string(Objective o) {
    switch (o) {
        case Objective::dirichlet_energy: return "dirichlet_energy";
        case Objective::eigenvalue: return "eigenvalue";
        case Objective::nonenergetic: return "nonenergetic";
    }
    return "?";
}

JSpec JSpec::quadratic(double u_max) {
    JSpec j;
    j.kind_ = JKind::quadratic;
    j.verify_hypotheses(u_max);
    return j;
}

JSpec JSpec::exponential(double u_max) {
    JSpec j;
    j.kind_ = JKind::exponential;
    j.verify_hypotheses(u_max);
    return j;
}

JSpec JSpec::tabulated(std::vector<double> u_knots, std::vector<double> j_values) {
    if (u_knots.size() < 4 || u_knots.size() != j_values.size())
        throw std::invalid_argument("JSpec::tabulated: need >= 4 matching knots/values");
    for (size_t i = 1; i < u_knots.size(); ++i)
        if (!(u_knots[i] > u_knots[i - 1]))
            throw std::invalid_argument("JSpec::tabulated: knots must be strictly increasing");
    JSpec j;
    j.kind_ = JKind::tabulated;
    j.knots_ = std::move(u_knots);
    const size_t m = j.knots_.size() - 1;
    // natural cubic spline: solve tridiagonal system for second derivatives
    std::vector<double> hseg(m), alpha(m + 1, 0.0), ell(m + 1, 1.0), mu(m + 1, 0.0),
        z(m + 1, 0.0), c(m + 1, 0.0);
    for (size_t i = 0; i < m; ++i) hseg[i] = j.knots_[i + 1] - j.knots_[i];
    for (size_t i = 1; i < m; ++i)
        alpha[i] = 3.0 * (j_values[i + 1] - j_values[i]) / hseg[i] -
                   3.0 * (j_values[i] - j_values[i - 1]) / hseg[i - 1];
    for (size_t i = 1; i < m; ++i) {
        ell[i] = 2.0 * (j.knots_[i + 1] - j.knots_[i - 1]) - hseg[i - 1] * mu[i - 1];
        mu[i] = hseg[i] / ell[i];
        z[i] = (alpha[i] - hseg[i - 1] * z[i - 1]) / ell[i];
    }
    j.coef_a_ = j_values;
    j.coef_b_.assign(m, 0.0);
    j.coef_c_ = c;
    j.coef_d_.assign(m, 0.0);
    for (size_t i = m; i-- > 0;) {
        j.coef_c_[i] = z[i] - mu[i] * j.coef_c_[i + 1];
        j.coef_b_[i] = (j_values[i + 1] - j_values[i]) / hseg[i] -
                       hseg[i] * (j.coef_c_[i + 1] + 2.0 * j.coef_c_[i]) / 3.0;
        j.coef_d_[i] = (j.coef_c_[i + 1] - j.coef_c_[i]) / (3.0 * hseg[i]);
    }
    j.verify_hypotheses(j.knots_.back());
    return j;
}

int JSpec::find_interval(double u) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
    int i = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(knots_.size()) - 2);
}

double JSpec::value(double u) const {
    switch (kind_) {
        case JKind::quadratic: return u * u;
        case JKind::exponential: return std::expm1(u) - u;
        case JKind::tabulated: break;
    }
    const int i = find_interval(u);
    const double d = u - knots_[i];
    return coef_a_[i] + d * (coef_b_[i] + d * (coef_c_[i] + d * coef_d_[i]));
}

double JSpec::d1(double u) const {
    switch (kind_) {
        case JKind::quadratic: return 2.0 * u;
        case JKind::exponential: return std::expm1(u);
        case JKind::tabulated: break;
    }
    const int i = find_interval(u);
    const double d = u - knots_[i];
    return coef_b_[i] + d * (2.0 * coef_c_[i] + 3.0 * d * coef_d_[i]);
}

double JSpec::d2(double u) const {
    switch (kind_) {
        case JKind::quadratic: return 2.0;
        case JKind::exponential: return std::exp(u);
        case JKind::tabulated: break;
    }
    const int i = find_interval(u);
    const double d = u - knots_[i];
    return 2.0 * coef_c_[i] + 6.0 * d * coef_d_[i];
}

void JSpec::verify_hypotheses(double u_max) const {
    if (!(u_max > 0.0)) throw std::invalid_argument("JSpec: u_max must be positive");
    for (int k = 1; k <= 100; ++k) {
        const double u = u_max * k / 100.0;
        if (!(d1(u) > 0.0))
            throw std::invalid_argument("JSpec: j is not strictly increasing on (0,u_max]");
        if (!(d2(u) > 0.0))
            throw std::invalid_argument("JSpec: j is not strictly convex on (0,u_max]");
    }
}

Evaluation evaluate_with_switch(const ObjectiveSpec& obj, const ControlField& f) {
    switch (obj.kind) {
        case Objective::dirichlet_energy: {
            ScalarField u = solve_state(f);
            // discrete identity: ∫|∇u|² = ∫ f u, so E(f) = -½ ∫ f u
            const double value = -0.5 * integrate(u, f);
            return Evaluation{value, u, u};
        }
        case Objective::eigenvalue: {
            EigenPair ep = principal_eigenpair(f);
            return Evaluation{ep.value, ep.function, ep.function};
        }
        case Objective::nonenergetic: {
            ScalarField u = solve_state(f);
            std::vector<double> jvals(u.values.size());
            for (size_t i = 0; i < jvals.size(); ++i) jvals[i] = obj.j.value(u.values[i]);
            const double value = integrate(ScalarField(f.grid, std::move(jvals)));
            ScalarField p = solve_adjoint(u, obj.j);
            return Evaluation{value, std::move(u), std::move(p)};
        }
    }
    throw std::logic_error("evaluate_with_switch: bad objective");
}

std::pair<double, ScalarField> evaluate(const ObjectiveSpec& obj, const ControlField& f) {
    Evaluation e = evaluate_with_switch(obj, f);
    return {e.value, std::move(e.state)};
}

ScalarField switch_field(const ObjectiveSpec& obj, const ControlField& f) {
    return std::move(evaluate_with_switch(obj, f).switch_field);
}

GradientCheckReport gradient_check(const ObjectiveSpec& obj, const ControlField& f,
                                   const ScalarField& h, std::span<const double> steps) {
    if (!same_grid(f.grid, h.grid)) throw std::invalid_argument("gradient_check: mismatched grids");
    if (steps.empty()) throw std::invalid_argument("gradient_check: no steps");
    double hmean = 0.0;
    for (double v : h.values) hmean += v;
    hmean /= h.size();
    if (std::abs(hmean) > 1e-10 * std::max(1.0, h.max_abs()))
        throw std::invalid_argument("gradient_check: direction must have zero mean");
    const double tmax = *std::max_element(steps.begin(), steps.end());
    for (int k = 0; k < f.size(); ++k) {
        const double v = f[k] + tmax * h[k];
        if (v < -1e-12 || v > 1.0 + 1e-12)
            throw std::invalid_argument("gradient_check: direction leaves the box constraints");
    }

    Evaluation base = evaluate_with_switch(obj, f);
    double predicted = 0.0;
    // predicted slope per lemma: -∫ h u_f, -∫ h η², +∫ h p_f
    {
        double s = 0.0;
        for (int k = 0; k < f.size(); ++k) {
            const double w = base.switch_field[k];
            switch (obj.kind) {
                case Objective::dirichlet_energy: s += -h[k] * w; break;
                case Objective::eigenvalue: s += -h[k] * w * w; break;
                case Objective::nonenergetic: s += h[k] * w; break;
            }
        }
        predicted = s * f.grid->cell_measure();
    }

    GradientCheckReport rep;
    rep.predicted_slope = predicted;
    for (double t : steps) {
        std::vector<double> pert(f.values);
        for (int k = 0; k < f.size(); ++k)
            pert[k] = std::clamp(pert[k] + t * h[k], 0.0, 1.0);
        ControlField fp(f.grid, std::move(pert), f.target_fraction);
        const double gt = evaluate_with_switch(obj, fp).value;
        GradientCheckRow row;
        row.t = t;
        row.finite_difference = (gt - base.value) / t;
        row.predicted = predicted;
        row.mismatch = std::abs(row.finite_difference - predicted);
        rep.rows.push_back(row);
    }
    // least-squares order over rows with a meaningful mismatch
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& r : rep.rows) {
        if (r.mismatch <= 1e-14) continue;
        const double lx = std::log(r.t), ly = std::log(r.mismatch);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    rep.observed_order = (m >= 2) ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return rep;
}

}  // namespace thresholdopt
