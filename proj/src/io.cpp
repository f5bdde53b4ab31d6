#include "thresholdopt/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace thresholdopt {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

void write_csv_impl(const std::filesystem::path& path, const GridPtr& grid,
                    const std::vector<double>& values) {
    std::ofstream os = open_out(path);
    os << "i,j,x,y,value\n";
    for (int k = 0; k < grid->active_count(); ++k) {
        os << grid->ix_of(k) << ',' << grid->iy_of(k) << ',' << format_double(grid->x_of(k))
           << ',' << format_double(grid->y_of(k)) << ',' << format_double(values[k]) << '\n';
    }
}

void write_pgm_impl(const std::filesystem::path& path, const GridPtr& grid,
                    const std::vector<double>& values) {
    const int n = grid->cells_per_axis();
    const int ny = grid->dim() == 1 ? 1 : n;
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    const double span = hi - lo;
    std::ofstream os = open_out(path, /*binary=*/true);
    os << "P5\n" << n << ' ' << ny << "\n255\n";
    for (int row = ny - 1; row >= 0; --row) {
        for (int ix = 0; ix < n; ++ix) {
            const int k = grid->index(ix, grid->dim() == 1 ? 0 : row);
            unsigned char byte = 0;
            if (k >= 0 && span > 0.0)
                byte = static_cast<unsigned char>(
                    std::clamp(255.0 * (values[k] - lo) / span + 0.5, 0.0, 255.0));
            os.put(static_cast<char>(byte));
        }
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
    write_csv_impl(path, f.grid, f.values);
}
void write_field_csv(const std::filesystem::path& path, const ControlField& f) {
    write_csv_impl(path, f.grid, f.values);
}
void write_field_pgm(const std::filesystem::path& path, const ScalarField& f) {
    write_pgm_impl(path, f.grid, f.values);
}
void write_field_pgm(const std::filesystem::path& path, const ControlField& f) {
    write_pgm_impl(path, f.grid, f.values);
}

void write_trace_jsonl(const std::filesystem::path& path, const IterationTrace& trace) {
    std::ofstream os = open_out(path);
    for (const auto& r : trace.records) {
        os << "{\"k\":" << r.k << ",\"objective\":" << format_double(r.objective)
           << ",\"level\":" << format_double(r.level)
           << ",\"increment\":" << format_double(r.increment) << ",\"tie_cells\":" << r.tie_cells
           << ",\"cum_sq_increment\":" << format_double(r.cum_sq_increment) << "}\n";
    }
}

void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace) {
    std::ofstream os = open_out(path);
    os << "k,objective,level,increment,tie_cells,cum_sq_increment\n";
    for (const auto& r : trace.records) {
        os << r.k << ',' << format_double(r.objective) << ',' << format_double(r.level) << ','
           << format_double(r.increment) << ',' << r.tie_cells << ','
           << format_double(r.cum_sq_increment) << '\n';
    }
}

void write_summary_json(const std::filesystem::path& path, const RunSummary& s) {
    std::ofstream os = open_out(path);
    os << "{\n"
       << "  \"status\": \"" << s.status << "\",\n"
       << "  \"objective\": \"" << s.objective << "\",\n"
       << "  \"domain\": \"" << s.domain << "\",\n"
       << "  \"resolution\": " << s.resolution << ",\n"
       << "  \"v0\": " << format_double(s.v0) << ",\n"
       << "  \"tolerance\": " << format_double(s.tolerance) << ",\n"
       << "  \"iterations\": " << s.iterations << ",\n"
       << "  \"objective_value\": " << format_double(s.objective_value) << ",\n"
       << "  \"final_increment\": " << format_double(s.final_increment) << "\n"
       << "}\n";
}

void write_stability_json(const std::filesystem::path& path, const StabilityReport& rep) {
    std::ofstream os = open_out(path);
    os << "{\n"
       << "  \"lambda0\": " << format_double(rep.lambda0) << ",\n"
       << "  \"eigenvalues\": [";
    for (size_t i = 0; i < rep.eigenvalues.size(); ++i)
        os << (i ? ", " : "") << format_double(rep.eigenvalues[i]);
    os << "],\n"
       << "  \"coercivity_bound\": " << format_double(rep.coercivity_bound) << ",\n"
       << "  \"stable\": " << (rep.stable ? "true" : "false") << ",\n"
       << "  \"boundary_measure\": " << format_double(rep.boundary_measure) << ",\n"
       << "  \"level\": " << format_double(rep.level) << ",\n"
       << "  \"pencil_iterations\": " << rep.pencil_iterations << "\n"
       << "}\n";
}

void write_coercivity_csv(const std::filesystem::path& path,
                          const std::vector<CoercivityRow>& rows) {
    std::ofstream os = open_out(path);
    os << "V0,lambda0,coercivity_bound,stable,status\n";
    for (const auto& r : rows) {
        os << format_double(r.v0) << ',' << format_double(r.lambda0) << ','
           << format_double(r.coercivity_bound) << ',' << (r.stable ? "true" : "false") << ','
           << r.status << '\n';
    }
}

std::vector<double> read_field_csv_values(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    std::getline(is, line);  // header
    std::vector<double> out;
    while (std::getline(is, line)) {
        const auto pos = line.rfind(',');
        if (pos == std::string::npos) continue;
        out.push_back(std::stod(line.substr(pos + 1)));
    }
    return out;
}

}  // namespace thresholdopt
