#pragma once

#include <filesystem>
#include <string>

#include "thresholdopt/grid.hpp"
#include "thresholdopt/stability.hpp"
#include "thresholdopt/threshold_loop.hpp"

namespace thresholdopt {

/// 17-significant-digit formatting: round-trip exact and byte-reproducible.
std::string format_double(double v);

void write_field_csv(const std::filesystem::path& path, const ScalarField& field);
void write_field_csv(const std::filesystem::path& path, const ControlField& field);

/// 8-bit binary PGM; values min-max normalized, inactive cells rendered 0.
void write_field_pgm(const std::filesystem::path& path, const ScalarField& field);
void write_field_pgm(const std::filesystem::path& path, const ControlField& field);

/// One JSON object per iteration (wall times excluded; they live in the
/// run metadata so identical configs produce byte-identical traces).
void write_trace_jsonl(const std::filesystem::path& path, const IterationTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace);

struct RunSummary {
    std::string status;
    std::string objective;
    std::string domain;
    int resolution = 0;
    double v0 = 0.0;
    double tolerance = 0.0;
    int iterations = 0;
    double objective_value = 0.0;
    double final_increment = 0.0;
};

void write_summary_json(const std::filesystem::path& path, const RunSummary& s);
void write_stability_json(const std::filesystem::path& path, const StabilityReport& rep);

/// Header "V0,lambda0,coercivity_bound,stable,status".
void write_coercivity_csv(const std::filesystem::path& path,
                          const std::vector<CoercivityRow>& rows);

/// Values in row-major cell order, parsed back from the "i,j,x,y,value" CSV.
std::vector<double> read_field_csv_values(const std::filesystem::path& path);

}  // namespace thresholdopt
