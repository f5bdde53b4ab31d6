// thresholdopt: fixed-point thresholding runs, V0 sweeps, Steklov stability
// reports, and a built-in validation battery.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "thresholdopt/bathtub.hpp"
#include "thresholdopt/io.hpp"
#include "thresholdopt/pde.hpp"
#include "thresholdopt/stability.hpp"
#include "thresholdopt/threshold_loop.hpp"

namespace fs = std::filesystem;
using namespace thresholdopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitCycle = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string objective = "dirichlet";
    std::string jkind = "quadratic";
    std::string domain = "square";
    int n = 64;
    double a = -1.0, b = 1.0, side = 1.0, radius = 1.0;
    double v0 = 0.8;
    double tol = 1e-6;
    int max_iter = 500;
    std::string init = "constant";
    std::uint64_t seed = 0;
    std::vector<double> box{0.0, 0.5, 0.0, 0.5};
    std::string mode = "binary";
    std::string out_dir;
    int snapshot_every = 0;
    bool force = false;
    int verbosity = 1;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("THRESHOLDOPT_OUT")) return env;
    return "out";
}

ObjectiveSpec parse_objective(const CommonOpts& o) {
    ObjectiveSpec spec;
    if (o.objective == "dirichlet") spec.kind = Objective::dirichlet_energy;
    else if (o.objective == "eigenvalue") spec.kind = Objective::eigenvalue;
    else if (o.objective == "nonenergetic") spec.kind = Objective::nonenergetic;
    else throw CLI::ValidationError("--objective", "unknown objective: " + o.objective);
    if (spec.kind == Objective::nonenergetic)
        spec.j = o.jkind == "exponential" ? JSpec::exponential() : JSpec::quadratic();
    return spec;
}

DomainSpec parse_domain(const CommonOpts& o) {
    if (o.domain == "interval") return DomainSpec::interval(o.a, o.b, o.n);
    if (o.domain == "square") return DomainSpec::square(o.side, o.n);
    if (o.domain == "disk") return DomainSpec::disk(o.radius, o.n);
    throw CLI::ValidationError("--domain", "unknown domain: " + o.domain);
}

RunConfig build_run_config(const CommonOpts& o) {
    RunConfig cfg;
    cfg.objective = parse_objective(o);
    cfg.domain = parse_domain(o);
    cfg.v0 = o.v0;
    cfg.tolerance = o.tol;
    cfg.max_iter = o.max_iter;
    cfg.mode = o.mode == "fractional" ? ThresholdMode::fractional : ThresholdMode::strict_binary;
    if (o.init == "constant") cfg.init.kind = InitKind::constant;
    else if (o.init == "checkerboard") cfg.init.kind = InitKind::checkerboard;
    else if (o.init == "box") cfg.init.kind = InitKind::indicator_box;
    else if (o.init == "random") cfg.init.kind = InitKind::seeded_random;
    else throw CLI::ValidationError("--init", "unknown init: " + o.init);
    cfg.init.seed = o.seed;
    for (int i = 0; i < 4 && i < static_cast<int>(o.box.size()); ++i)
        cfg.init.box[i] = o.box[i];
    return cfg;
}

void ensure_fresh(const fs::path& p, bool force) {
    if (!force && fs::exists(p))
        throw UsageError("refusing to overwrite " + p.string() + " (use --force)");
}

void write_meta(const fs::path& dir, double wall_ms) {
    std::ofstream os(dir / "meta.json");
    os << "{ \"total_wall_ms\": " << format_double(wall_ms) << " }\n";
}

int status_exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::converged: return kExitOk;
        case RunStatus::max_iter: return kExitMaxIter;
        case RunStatus::cycled: return kExitCycle;
    }
    return kExitSolverFailure;
}

struct SolveArtifacts {
    RunStatus status = RunStatus::max_iter;
    int iterations = 0;
    double objective_value = 0.0;
    double lambda0 = std::nan("");
    bool stable = false;
    double coercivity_bound = std::nan("");
    std::string error;
};

/// Runs one configuration and writes the artifact set into `dir`.
SolveArtifacts run_and_write(const CommonOpts& o, const fs::path& dir, bool with_stability,
                             int n_modes) {
    fs::create_directories(dir);
    for (const char* name : {"trace.jsonl", "trace.csv", "final_field.csv", "final_field.pgm",
                             "summary.json"})
        ensure_fresh(dir / name, o.force);

    RunConfig cfg = build_run_config(o);
    if (o.snapshot_every > 0) {
        fs::create_directories(dir / "fields");
        cfg.on_iterate = [&, every = o.snapshot_every](int k, const ControlField& f) {
            if (k % every != 0) return;
            char name[32];
            std::snprintf(name, sizeof(name), "f_%04d", k);
            write_field_csv(dir / "fields" / (std::string(name) + ".csv"), f);
            write_field_pgm(dir / "fields" / (std::string(name) + ".pgm"), f);
        };
    }

    SolveArtifacts art;
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res = run(cfg);
    const auto t1 = std::chrono::steady_clock::now();

    art.status = res.trace.status;
    art.iterations = res.trace.iterations;
    art.objective_value = res.trace.final_objective;

    write_trace_jsonl(dir / "trace.jsonl", res.trace);
    write_trace_csv(dir / "trace.csv", res.trace);
    write_field_csv(dir / "final_field.csv", res.f_final);
    write_field_pgm(dir / "final_field.pgm", res.f_final);

    RunSummary summary;
    summary.status = to_string(res.trace.status);
    summary.objective = to_string(cfg.objective.kind);
    summary.domain = to_string(cfg.domain.shape);
    summary.resolution = cfg.domain.resolution;
    summary.v0 = cfg.v0;
    summary.tolerance = cfg.tolerance;
    summary.iterations = res.trace.iterations;
    summary.objective_value = res.trace.final_objective;
    summary.final_increment =
        res.trace.records.empty() ? 0.0 : res.trace.records.back().increment;
    write_summary_json(dir / "summary.json", summary);
    write_meta(dir, std::chrono::duration<double, std::milli>(t1 - t0).count());

    const AuditReport audit = monotonicity_audit(res.trace);
    if (audit.violations > 0)
        std::cerr << "warning: " << audit.violations
                  << " objective-monotonicity violations in the trace\n";

    if (with_stability && res.trace.status == RunStatus::converged) {
        ensure_fresh(dir / "stability.json", o.force);
        const ScalarField q = switch_field(cfg.objective, res.f_final);
        const LevelCurve curve = extract_level_curve(q, cfg.v0);
        const StabilityReport rep = steklov_lambda0(res.f_final.grid, curve, n_modes);
        write_stability_json(dir / "stability.json", rep);
        art.lambda0 = rep.lambda0;
        art.stable = rep.stable;
        art.coercivity_bound = rep.coercivity_bound;
    }
    return art;
}

int cmd_solve(const CommonOpts& o) {
    const fs::path dir = o.out_dir;
    SolveArtifacts art = run_and_write(o, dir, /*with_stability=*/false, 1);
    if (o.verbosity > 0)
        std::cout << "status=" << to_string(art.status) << " iterations=" << art.iterations
                  << " objective=" << format_double(art.objective_value) << " -> " << dir.string()
                  << "\n";
    return status_exit_code(art.status);
}

int cmd_stability(const CommonOpts& o, int n_modes) {
    const fs::path dir = o.out_dir;
    SolveArtifacts art = run_and_write(o, dir, /*with_stability=*/true, n_modes);
    if (art.status != RunStatus::converged) {
        std::cerr << "stability: run did not converge (" << to_string(art.status) << ")\n";
        return status_exit_code(art.status);
    }
    if (o.verbosity > 0)
        std::cout << "lambda0=" << format_double(art.lambda0)
                  << " coercivity_bound=" << format_double(art.coercivity_bound)
                  << " stable=" << (art.stable ? "true" : "false") << " -> "
                  << (dir / "stability.json").string() << "\n";
    return kExitOk;
}

std::string v0_dir_name(double v0) {
    std::ostringstream os;
    os << "v0_" << v0;
    std::string s = os.str();
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

int cmd_sweep(const CommonOpts& o, const std::vector<double>& v0_list, bool with_stability,
              int jobs) {
    if (v0_list.empty()) {
        std::cerr << "sweep: empty --v0-list\n";
        return kExitUsage;
    }
    const fs::path dir = o.out_dir;
    fs::create_directories(dir);
    ensure_fresh(dir / "sweep.csv", o.force);

    std::vector<SolveArtifacts> rows(v0_list.size());
    std::atomic<size_t> next{0};
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(v0_list.size())));

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= v0_list.size()) return;
            CommonOpts row_opts = o;
            row_opts.v0 = v0_list[i];
            row_opts.verbosity = 0;
            try {
                rows[i] = run_and_write(row_opts, dir / v0_dir_name(v0_list[i]), with_stability, 1);
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ofstream os(dir / "sweep.csv");
    os << "V0,status,iterations,objective_value,lambda0,coercivity_bound,stable\n";
    int failures = 0;
    for (size_t i = 0; i < v0_list.size(); ++i) {
        const auto& r = rows[i];
        std::string status = r.error.empty() ? to_string(r.status) : "error";
        if (!r.error.empty() || r.status != RunStatus::converged) ++failures;
        os << format_double(v0_list[i]) << ',' << status << ',' << r.iterations << ','
           << format_double(r.objective_value) << ','
           << (std::isnan(r.lambda0) ? "" : format_double(r.lambda0)) << ','
           << (std::isnan(r.coercivity_bound) ? "" : format_double(r.coercivity_bound)) << ','
           << (std::isnan(r.lambda0) ? "" : (r.stable ? "true" : "false")) << '\n';
    }
    if (o.verbosity > 0)
        std::cout << "sweep: " << v0_list.size() - failures << "/" << v0_list.size()
                  << " rows converged -> " << (dir / "sweep.csv").string() << "\n";
    return failures == static_cast<int>(v0_list.size()) ? kExitSolverFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// validate: built-in analytic battery

struct Check {
    std::string name;
    std::string status;  // PASS / FAIL / SKIP
    std::string detail;
};

int cmd_validate(int n_flag) {
    std::vector<Check> checks;
    auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        checks.push_back({name, ok ? "PASS" : "FAIL", detail});
    };
    auto skip = [&](const std::string& name, const std::string& why) {
        checks.push_back({name, "SKIP", why});
    };
    const bool coarse = n_flag > 0 && n_flag < 128;

    {  // disk mask area
        const int n = n_flag > 0 ? n_flag : 64;
        auto g = build_grid(DomainSpec::disk(1.0, n));
        const double err = std::abs(g->total_measure() - M_PI);
        std::ostringstream d;
        d << "area=" << g->total_measure() << " vs pi, err=" << err;
        record("disk mask area (<=2% of pi)", err <= 0.02 * M_PI, d.str());
    }
    {  // 1D torsion midpoint + convergence order
        auto value_at_center = [](int n) {
            auto g = build_grid(DomainSpec::interval(-1.0, 1.0, n));
            auto w = torsion(g);
            double best = 0.0, bx = 1e9;
            for (int k = 0; k < g->active_count(); ++k)
                if (std::abs(g->x_of(k)) < bx) {
                    bx = std::abs(g->x_of(k));
                    best = (*w)[k];
                }
            double maxerr = 0.0;
            for (int k = 0; k < g->active_count(); ++k) {
                const double x = g->x_of(k);
                maxerr = std::max(maxerr, std::abs((*w)[k] - 0.5 * (1 - x * x)));
            }
            return std::pair{best, maxerr};
        };
        if (coarse) {
            skip("1D torsion O(h^2) order", "coarse grid flag");
        } else {
            auto [v128, e128] = value_at_center(128);
            auto [v256, e256] = value_at_center(256);
            const double order = std::log2(e128 / e256);
            std::ostringstream d;
            d << "w(center)=" << v256 << " err128=" << e128 << " err256=" << e256
              << " order=" << order;
            record("1D torsion O(h^2) order (>=1.8)", order >= 1.8 && std::abs(v256 - 0.5) < 1e-3,
                   d.str());
        }
    }
    {  // unit-square eigenvalue closed form
        const int n = n_flag > 0 ? n_flag : 64;
        auto g = build_grid(DomainSpec::square(1.0, n));
        auto A = dirichlet_laplacian(g);
        EigenResult e = smallest_eigenpair(*A, 0.0, 1e-10);
        const double h = g->h();
        const double exact = 8.0 / (h * h) * std::pow(std::sin(M_PI * h / 2.0), 2);
        const double rel = std::abs(e.value - exact) / exact;
        std::ostringstream d;
        d << "lambda=" << e.value << " closed form=" << exact << " rel=" << rel;
        record("square eigenvalue closed form (1e-6 rel)", rel <= 1e-6, d.str());
    }
    {  // eigenvalue shift identity
        const int n = n_flag > 0 ? n_flag : 32;
        auto g = build_grid(DomainSpec::square(1.0, n));
        auto A = dirichlet_laplacian(g);
        EigenResult free0 = smallest_eigenpair(*A, 0.0, 1e-11);
        std::vector<double> ones(g->active_count(), 1.0);
        EigenResult shifted = smallest_eigenpair(A->minus_diag(ones), -2.0, 1e-11);
        const double err = std::abs((free0.value - 1.0) - shifted.value);
        std::ostringstream d;
        d << "lambda(f=0)-1=" << free0.value - 1.0 << " lambda(f=1)=" << shifted.value
          << " err=" << err;
        record("eigenvalue shift identity (1e-9)", err <= 1e-9, d.str());
    }
    {  // bathtub oracle equivalence
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        bool ok = true;
        int trials = 0;
        for (int rep = 0; rep < 40 && ok; ++rep) {
            const int n = 8 + static_cast<int>(rng() % 5);  // 8..12 cells
            auto g = build_grid(DomainSpec::interval(0.0, 1.0, n));
            std::vector<double> q(n);
            for (double& v : q) v = uni(rng);
            for (double v0 : {0.25, 0.5, 0.75}) {
                ScalarField qs(g, q);
                const OracleResult oracle = bathtub_oracle(qs, v0);
                const ThresholdResult thr = find_threshold(qs, v0);
                const double got = integrate(qs, thr.indicator);
                if (std::abs(got - oracle.binary_optimum) > 1e-12) ok = false;
                ++trials;
            }
        }
        record("bathtub oracle equivalence", ok, std::to_string(trials) + " random instances");
    }
    {  // 1D Steklov closed form
        if (coarse) {
            skip("1D Steklov 2/eps", "coarse grid flag");
        } else {
            const int n = 512;
            const double eps = 0.1;
            auto g = build_grid(DomainSpec::interval(-1.0, 1.0, n));
            const double c = 1.0 - eps / 2.0;
            std::vector<double> f(g->active_count());
            for (int k = 0; k < g->active_count(); ++k) {
                const double lo = g->x_of(k) - g->h() / 2.0, hi = g->x_of(k) + g->h() / 2.0;
                f[k] = std::clamp((std::min(hi, c) - std::max(lo, -c)) / g->h(), 0.0, 1.0);
            }
            ControlField E(g, std::move(f), c);
            const ScalarField u = solve_state(E);
            const LevelCurve curve = extract_level_curve(u, E.mean());
            const StabilityReport rep = steklov_lambda0(g, curve);
            const double target = 2.0 / eps;
            const double rel = std::abs(rep.lambda0 - target) / target;
            std::ostringstream d;
            d << "lambda0=" << rep.lambda0 << " vs 2/eps=" << target << " rel=" << rel;
            record("1D Steklov 2/eps (10%)", rel <= 0.10, d.str());
        }
    }
    {  // adjoint closed form
        const int n = n_flag > 0 ? std::max(64, n_flag) : 256;
        auto g = build_grid(DomainSpec::interval(-1.0, 1.0, n));
        ScalarField u = solve_poisson(ScalarField::constant(g, 1.0));
        ScalarField p = solve_adjoint(u, JSpec::quadratic());
        double got = 0.0, bx = 1e9;
        for (int k = 0; k < g->active_count(); ++k)
            if (std::abs(g->x_of(k)) < bx) {
                bx = std::abs(g->x_of(k));
                got = p[k];
            }
        const double expect = 5.0 / 24.0;
        std::ostringstream d;
        d << "p(0)=" << got << " vs 5/24=" << expect;
        record("1D adjoint closed form (O(h^2))", std::abs(got - expect) < 5e-4, d.str());
    }

    int failures = 0;
    for (const auto& c : checks) {
        std::cout << "[" << c.status << "] " << c.name << " — " << c.detail << "\n";
        if (c.status == "FAIL") ++failures;
    }
    std::cout << (failures == 0 ? "validate: all checks passed\n"
                                : "validate: " + std::to_string(failures) + " check(s) failed\n");
    return failures == 0 ? kExitOk : kExitSolverFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thresholdopt: thresholding scheme for volume-constrained optimal control"};
    app.require_subcommand(1);
    app.set_config("--config")->description("flat key=value config file (# comments)");

    CommonOpts o;
    o.out_dir = default_out_dir();

    auto add_common = [&](CLI::App* sub, bool needs_v0) {
        sub->add_option("--objective", o.objective, "dirichlet|eigenvalue|nonenergetic");
        sub->add_option("--j", o.jkind, "nonenergetic integrand: quadratic|exponential");
        sub->add_option("--domain", o.domain, "interval|square|disk");
        sub->add_option("--n", o.n, "cells per axis (>= 8)");
        sub->add_option("--a", o.a, "interval left endpoint");
        sub->add_option("--b", o.b, "interval right endpoint");
        sub->add_option("--side", o.side, "square side");
        sub->add_option("--radius", o.radius, "disk radius");
        auto* v0opt = sub->add_option("--v0", o.v0, "volume fraction in (0,1)");
        if (needs_v0) v0opt->required();
        sub->add_option("--tol", o.tol, "stopping tolerance on the L1 increment");
        sub->add_option("--max-iter", o.max_iter, "iteration cap");
        sub->add_option("--init", o.init, "constant|checkerboard|box|random");
        sub->add_option("--seed", o.seed, "seed for --init random");
        sub->add_option("--box", o.box, "box init bounds x0 x1 y0 y1")->expected(4);
        sub->add_option("--mode", o.mode, "binary|fractional");
        sub->add_option("--out", o.out_dir, "output directory (env THRESHOLDOPT_OUT)");
        sub->add_option("--snapshot-every", o.snapshot_every, "dump fields every m iterations");
        sub->add_flag("--force", o.force, "overwrite existing outputs");
        sub->add_option("-v,--verbosity", o.verbosity, "0 = quiet");
    };

    auto* solve = app.add_subcommand("solve", "run the thresholding loop");
    add_common(solve, true);

    auto* sweep = app.add_subcommand("sweep", "run a list of V0 values");
    std::vector<double> v0_list;
    bool sweep_stability = false;
    int jobs = 0;
    add_common(sweep, false);
    sweep->add_option("--v0-list", v0_list, "V0 values")->required()->delimiter(',');
    sweep->add_flag("--stability", sweep_stability, "compute lambda0 per row");
    sweep->add_option("--jobs", jobs, "parallel workers (default: logical processors)");

    auto* stability = app.add_subcommand("stability", "solve, then certify L2 stability");
    int n_modes = 1;
    add_common(stability, true);
    stability->add_option("--modes", n_modes, "number of Steklov eigenvalues");

    auto* validate = app.add_subcommand("validate", "run the built-in analytic battery");
    int validate_n = 0;
    validate->add_option("--n", validate_n, "override grid resolution (coarse => SKIP slow checks)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(o);
        if (sweep->parsed()) return cmd_sweep(o, v0_list, sweep_stability, jobs);
        if (stability->parsed()) return cmd_stability(o, n_modes);
        if (validate->parsed()) return cmd_validate(validate_n);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolverFailure;
    }
    return kExitUsage;
}
