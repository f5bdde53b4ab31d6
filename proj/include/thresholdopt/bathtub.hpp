#pragma once

#include <vector>

#include "thresholdopt/grid.hpp"

namespace thresholdopt {

enum class ThresholdMode { strict_binary, fractional };

struct ThresholdResult {
    double level = 0.0;
    ControlField indicator;
    std::vector<int> tie_cells;  // cells whose value equals the level
    double achieved_fraction = 0.0;
    ThresholdMode mode = ThresholdMode::strict_binary;
};

/// Volume-constrained thresholding: the level c with Vol({q > c}) = V0|Ω|
/// and the corresponding bang-bang (or fractional) maximizer of ∫ q f.
/// Ties are broken deterministically by ascending cell index. In
/// strict_binary mode the top K = round(V0 N) cells are selected; in
/// fractional mode tie cells share the residual volume equally and the
/// achieved fraction equals V0 exactly.
ThresholdResult find_threshold(const ScalarField& q, double v0,
                               ThresholdMode mode = ThresholdMode::strict_binary);

struct OracleResult {
    double binary_optimum = 0.0;      // exhaustive enumeration over K-subsets
    double fractional_optimum = 0.0;  // sorted greedy fill (LP optimum)
};

/// Brute-force certificate for the bathtub principle; grids above 20 cells
/// are rejected.
OracleResult bathtub_oracle(const ScalarField& q, double v0);

struct GapResult {
    double gap = 0.0;    // ∫ q·best - ∫ q·f  (>= 0 up to rounding)
    double l1 = 0.0;     // ||f - best||_L1
    double ratio = 0.0;  // gap / l1², NaN when l1 = 0
};

GapResult quantitative_gap(const ScalarField& q, const ControlField& f,
                           const ThresholdResult& best);

}  // namespace thresholdopt
