#include "thresholdopt/threshold_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace thresholdopt {

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::converged: return "converged";
        case RunStatus::max_iter: return "max_iter";
        case RunStatus::cycled: return "cycled";
    }
    return "?";
}

ControlField make_initial(const GridPtr& grid, double v0, const InitSpec& init) {
    const int N = grid->active_count();
    const int K = static_cast<int>(std::llround(v0 * N));
    switch (init.kind) {
        case InitKind::constant:
            return ControlField::constant(grid, v0);
        case InitKind::seeded_random: {
            // stable uniform draw (independent of the stdlib distribution)
            std::vector<double> noise(N);
            std::uint64_t s = init.seed * 6364136223846793005ULL + 1442695040888963407ULL;
            auto next = [&s]() {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                return static_cast<double>(s >> 11) * 0x1.0p-53;
            };
            for (double& v : noise) v = next();
            ThresholdResult t = find_threshold(ScalarField(grid, std::move(noise)), v0);
            return t.indicator;
        }
        case InitKind::checkerboard:
        case InitKind::indicator_box: {
            std::vector<double> ind(N, 0.0);
            int ones = 0;
            for (int k = 0; k < N; ++k) {
                bool on;
                if (init.kind == InitKind::checkerboard) {
                    on = ((grid->ix_of(k) + grid->iy_of(k)) % 2) == 0;
                } else {
                    const double x = grid->x_of(k), y = grid->y_of(k);
                    on = x >= init.box[0] && x <= init.box[1] &&
                         (grid->dim() == 1 || (y >= init.box[2] && y <= init.box[3]));
                }
                if (on) {
                    ind[k] = 1.0;
                    ++ones;
                }
            }
            // deterministic volume adjustment to K ones
            for (int k = N - 1; k >= 0 && ones > K; --k)
                if (ind[k] > 0.0) {
                    ind[k] = 0.0;
                    --ones;
                }
            for (int k = 0; k < N && ones < K; ++k)
                if (ind[k] == 0.0) {
                    ind[k] = 1.0;
                    ++ones;
                }
            return ControlField(grid, std::move(ind), v0);
        }
    }
    throw std::logic_error("make_initial: bad init kind");
}

IterateResult iterate_once(const ObjectiveSpec& obj, const ControlField& f_k, ThresholdMode mode) {
    Evaluation ev = evaluate_with_switch(obj, f_k);
    ThresholdResult thr = find_threshold(ev.switch_field, f_k.target_fraction, mode);
    IterateResult out{thr.indicator, thr.level, static_cast<int>(thr.tie_cells.size()), 0.0,
                      ev.value};
    out.increment = l1_distance(out.f_next, f_k);
    return out;
}

int detect_cycle(const std::vector<std::vector<double>>& window,
                 const std::vector<double>& f_new) {
    for (size_t back = 0; back < window.size(); ++back) {
        const auto& cand = window[window.size() - 1 - back];
        if (cand == f_new) return static_cast<int>(back + 1);
    }
    return 0;
}

RunResult run(const RunConfig& config) {
    config.domain.validate();
    if (!(config.v0 > 0.0 && config.v0 < 1.0))
        throw std::invalid_argument("run: V0 must be in (0,1)");
    if (!(config.tolerance > 0.0)) throw std::invalid_argument("run: tolerance must be positive");

    const GridPtr grid = build_grid(config.domain);
    ControlField f = make_initial(grid, config.v0, config.init);

    IterationTrace trace;
    trace.sense = config.objective.sense();
    std::vector<std::vector<double>> window;  // previous iterates, oldest first
    window.push_back(f.values);
    double cum_sq = 0.0;

    for (int k = 0; k < config.max_iter; ++k) {
        if (config.on_iterate) config.on_iterate(k, f);
        const auto t0 = std::chrono::steady_clock::now();
        IterateResult step = iterate_once(config.objective, f, config.mode);
        const auto t1 = std::chrono::steady_clock::now();

        cum_sq += step.increment * step.increment;
        IterationRecord rec{k,
                            step.objective,
                            step.level,
                            step.increment,
                            step.tie_cells,
                            cum_sq,
                            std::chrono::duration<double, std::milli>(t1 - t0).count()};
        trace.records.push_back(rec);
        trace.iterations = k + 1;

        const int cycle = detect_cycle(window, step.f_next.values);
        f = std::move(step.f_next);

        if (step.increment <= config.tolerance) {
            trace.status = RunStatus::converged;
            trace.final_objective = evaluate_with_switch(config.objective, f).value;
            return RunResult{std::move(f), std::move(trace)};
        }
        if (cycle > 1) {
            trace.status = RunStatus::cycled;
            trace.cycle_length = cycle;
            trace.final_objective = evaluate_with_switch(config.objective, f).value;
            return RunResult{std::move(f), std::move(trace)};
        }
        window.push_back(f.values);
        if (window.size() > 4) window.erase(window.begin());
    }
    trace.status = RunStatus::max_iter;
    trace.final_objective = evaluate_with_switch(config.objective, f).value;
    return RunResult{std::move(f), std::move(trace)};
}

AuditReport monotonicity_audit(const IterationTrace& trace) {
    AuditReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.max_ratio = -std::numeric_limits<double>::infinity();
    const double slack = 1e-10;
    const double sign = trace.sense == Sense::minimize ? 1.0 : -1.0;
    for (size_t k = 0; k < trace.records.size(); ++k) {
        const double g_k = trace.records[k].objective;
        const double g_next = (k + 1 < trace.records.size()) ? trace.records[k + 1].objective
                                                             : trace.final_objective;
        const double improvement = sign * (g_k - g_next);  // >= 0 expected
        if (improvement < -slack) {
            ++rep.violations;
            rep.violating_iterations.push_back(trace.records[k].k);
        }
        const double inc = trace.records[k].increment;
        if (inc > 0.0) {
            const double ratio = improvement / (inc * inc);
            rep.min_ratio = std::min(rep.min_ratio, ratio);
            rep.max_ratio = std::max(rep.max_ratio, ratio);
            if (!(ratio > 0.0)) rep.all_ratios_positive = false;
            ++rep.ratios_counted;
        }
    }
    if (rep.ratios_counted == 0) {
        rep.min_ratio = rep.max_ratio = 0.0;
    }
    return rep;
}

}  // namespace thresholdopt
