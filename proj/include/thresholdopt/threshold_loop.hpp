#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "thresholdopt/bathtub.hpp"
#include "thresholdopt/grid.hpp"
#include "thresholdopt/objectives.hpp"

namespace thresholdopt {

enum class InitKind { constant, checkerboard, indicator_box, seeded_random };

struct InitSpec {
    InitKind kind = InitKind::constant;
    std::uint64_t seed = 0;
    // indicator_box bounds (x0,x1,y0,y1), in domain coordinates
    double box[4] = {0.0, 0.0, 0.0, 0.0};
};

struct RunConfig {
    ObjectiveSpec objective;
    DomainSpec domain;
    double v0 = 0.8;
    InitSpec init;
    double tolerance = 1e-6;
    int max_iter = 500;
    ThresholdMode mode = ThresholdMode::strict_binary;
    /// Invoked with (k, f_k) before each iteration when set (snapshot hook).
    std::function<void(int, const ControlField&)> on_iterate;
};

enum class RunStatus { converged, max_iter, cycled };

std::string to_string(RunStatus s);

struct IterationRecord {
    int k = 0;
    double objective = 0.0;        // G(f_k)
    double level = 0.0;            // c_k
    double increment = 0.0;        // ||f_{k+1} - f_k||_L1
    int tie_cells = 0;
    double cum_sq_increment = 0.0; // sum_{j<=k} ||f_{j+1}-f_j||²
    double wall_ms = 0.0;          // not serialized into the deterministic trace
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    RunStatus status = RunStatus::max_iter;
    double final_objective = 0.0;
    int iterations = 0;
    Sense sense = Sense::minimize;
    int cycle_length = 0;  // nonzero when status == cycled
};

struct IterateResult {
    ControlField f_next;
    double level = 0.0;
    int tie_cells = 0;
    double increment = 0.0;
    double objective = 0.0;  // G(f_k)
};

/// One thresholding step: f_{k+1} = 1_{ q_{f_k} > c_k }.
IterateResult iterate_once(const ObjectiveSpec& obj, const ControlField& f_k,
                           ThresholdMode mode = ThresholdMode::strict_binary);

struct RunResult {
    ControlField f_final;
    IterationTrace trace;
};

ControlField make_initial(const GridPtr& grid, double v0, const InitSpec& init);

/// Fixed-point driver: iterates until the L¹ increment drops below the
/// tolerance, an exact cycle is detected (window of 4 iterates), or max_iter.
RunResult run(const RunConfig& config);

struct AuditReport {
    int violations = 0;
    std::vector<int> violating_iterations;
    int ratios_counted = 0;
    double min_ratio = 0.0;  // empirical c1 estimates: (ΔG)/||Δf||²
    double max_ratio = 0.0;
    bool all_ratios_positive = true;
};

/// Checks the per-iteration descent (minimization) or ascent (maximization)
/// inequality against a 1e-10 slack and reports the empirical quantitative
/// constants.
AuditReport monotonicity_audit(const IterationTrace& trace);

/// Exposed for testing: detects f_new closing a cycle against a window of
/// previous iterates; returns the cycle length (0 = none, 1 = fixed point).
int detect_cycle(const std::vector<std::vector<double>>& window,
                 const std::vector<double>& f_new);

}  // namespace thresholdopt
