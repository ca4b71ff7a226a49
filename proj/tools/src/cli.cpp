#include "nucrec_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "nucrec/nucrec.hpp"

namespace nucrec::cli {

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    return f;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_real(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw DomainError("not a number: '" + text + "'");
    }
    return v;
}

// Version and command, then the effective settings of a parsed subcommand as
// "# key=value" lines. Settings lines minus "# " are valid --config lines.
std::vector<std::string> provenance(const CLI::App& sub) {
    std::vector<std::string> lines = {std::string("# nucrec ") + NUCREC_VERSION, "# command=" + sub.get_name()};
    std::istringstream cfg(sub.config_to_str(true, false));
    for (std::string line; std::getline(cfg, line);) {
        if (line.empty() || line.starts_with("config=") || line.ends_with("=\"\"")) continue;
        lines.push_back("# " + line);
    }
    return lines;
}

void emit(std::ostream& out, const std::vector<std::string>& header, const std::string& body) {
    for (const std::string& line : header) out << line << '\n';
    out << body;
}

void add_solver_flags(CLI::App& app, SolverConfig& cfg) {
    app.add_option("--max-iter", cfg.max_iter, "ADMM iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--tol", cfg.tol, "Stopping tolerance on primal and dual residuals, relative to 1+||b||")
        ->check(CLI::PositiveNumber);
    app.add_option("--penalty", cfg.penalty, "Initial ADMM penalty")->check(CLI::PositiveNumber);
    app.add_flag("--adaptive-penalty,!--fixed-penalty", cfg.adaptive_penalty, "Residual balancing of the penalty")
        ->default_str(cfg.adaptive_penalty ? "true" : "false");
}

struct SolveArgs {
    std::string map_path;
    std::string rhs_path;
    std::string truth_path;
    long long rows = 0;
    long long cols = 0;
    int n = 20;
    int rank = 1;
    double mu = 0.5;
    std::uint64_t seed = 1;
    std::string out;
    SolverConfig solver;
};

struct PhaseArgs {
    int n = 20;
    std::string beta_grid = "0.05:0.45:0.05";
    std::string mu_grid = "0.10:1.00:0.05";
    int repeats = 10;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out;
    std::string svg;
    bool overlay_weak = false;
    bool overlay_strong = false;
    bool quiet = false;
    SolverConfig solver;
};

struct BoundsArgs {
    int points = 200;
    std::string kind = "both";
    std::string out;
};

struct CertArgs {
    std::string map_path;
    long long rows = 0;
    long long cols = 0;
    int n = 20;
    double mu = 0.6;
    int rank = 1;
    int trials = 500;
    int restarts = 20;
    int iterations = 500;
    std::uint64_t seed = 1;
    std::string out;
};

struct McArgs {
    long long dim = 200;
    int trials = 50;
    std::uint64_t seed = 1;
    std::string out;
};

Vector read_vector(const std::string& path) {
    const Matrix m = load_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw DimensionError("'" + path + "' is not a vector");
}

LinearMap read_map(const std::string& path, long long rows, long long cols) {
    Matrix a = load_matrix(path);
    if (a.cols() != rows * cols) {
        throw DimensionError("'" + path + "' has " + std::to_string(a.cols()) + " columns, expected rows*cols = " +
                             std::to_string(rows * cols));
    }
    return LinearMap(std::move(a), rows, cols);
}

int run_solve(const CLI::App& sub, const SolveArgs& a, std::ostream& out) {
    a.solver.validate();
    std::optional<AffineProblem> problem;
    std::optional<Matrix> truth;
    std::ostringstream body;
    if (!a.map_path.empty()) {
        LinearMap map = read_map(a.map_path, a.rows, a.cols);
        Vector b = read_vector(a.rhs_path);
        if (!a.truth_path.empty()) truth = load_matrix(a.truth_path);
        problem.emplace(std::move(map), std::move(b), truth);
        body << "mode=file\n";
    } else {
        if (a.rank > a.n) throw DomainError("--rank exceeds --n");
        RngStream rng(a.seed);
        const int m = measurements_for(a.mu, a.n);
        truth = sample_low_rank(a.n, a.n, a.rank, rng);
        LinearMap map = sample_linear_map(m, a.n, a.n, rng);
        problem.emplace(AffineProblem::from_planted(std::move(map), *truth));
        body << "mode=planted\n";
    }
    const LinearMap& map = problem->map();
    const RecoveryResult res = solve_min_nuclear(*problem, a.solver);
    body << "rows=" << map.n1() << "\ncols=" << map.n2() << "\nmeasurements=" << map.rows() << '\n'
         << "converged=" << (res.converged ? "true" : "false") << "\niterations=" << res.iterations << '\n'
         << "nuclear_norm=" << fmt(res.nuclear_norm) << "\nprimal_residual=" << fmt(res.primal_residual) << '\n'
         << "dual_residual=" << fmt(res.dual_residual) << '\n';
    if (truth) {
        body << "relative_error=" << fmt(relative_error(res.X, *truth)) << '\n'
             << "verdict=" << (res.converged && check_recovery(res.X, *truth) ? "recovered" : "not recovered") << '\n';
    }
    const std::vector<std::string> header = provenance(sub);
    emit(out, header, body.str());
    if (!a.out.empty()) {
        std::ofstream f = open_output(a.out);
        for (const std::string& line : header) f << line << '\n';
        write_matrix(f, res.X);
        if (!f) throw IoError("write failed: '" + a.out + "'");
    }
    return res.converged ? kExitOk : kExitNotConverged;
}

int run_phase(const CLI::App& sub, const PhaseArgs& a, std::ostream& out, std::ostream& err) {
    GridSpec spec;
    spec.n = a.n;
    spec.beta_grid = parse_grid(a.beta_grid);
    spec.mu_grid = parse_grid(a.mu_grid);
    spec.repeats = a.repeats;
    spec.root_seed = a.seed;
    spec.solver = a.solver;
    spec.validate();

    RunOptions opts;
    opts.threads = a.threads;
    if (!a.quiet) {
        opts.on_cell = [&err](const CellResult& c) {
            err << "cell beta=" << fmt(c.beta) << " mu=" << fmt(c.mu) << " r=" << c.r << " m=" << c.m
                << " recovered=" << c.successes << '/' << c.attempts << " mean_iterations=" << fmt(c.mean_iterations)
                << '\n';
        };
    }
    const PhaseDiagram d = run_phase_grid(spec, opts);

    const std::vector<std::string> extra = {"command=phase"};
    if (a.out.empty()) {
        write_csv(out, d, extra);
    } else {
        std::ofstream f = open_output(a.out);
        write_csv(f, d, extra);
        if (!f) throw IoError("write failed: '" + a.out + "'");
    }
    if (!a.svg.empty()) {
        std::ofstream f = open_output(a.svg);
        f << "<!--\n";
        for (const std::string& line : provenance(sub)) f << line << '\n';
        f << "-->\n";
        write_heatmap_svg(f, d, a.overlay_weak, a.overlay_strong);
        if (!f) throw IoError("write failed: '" + a.svg + "'");
    }
    err << "cells=" << d.cells.size() << " skipped=" << d.skipped.size() << " nonconverged=" << d.nonconverged << '\n';
    return kExitOk;
}

int run_bounds(const CLI::App& sub, const BoundsArgs& a, std::ostream& out) {
    std::ostringstream body;
    if (a.kind == "weak" || a.kind == "both") write_bound_csv(body, bound_curve(BoundKind::weak, a.points));
    if (a.kind == "strong" || a.kind == "both") write_bound_csv(body, bound_curve(BoundKind::strong, a.points));
    const std::vector<std::string> header = provenance(sub);
    if (a.out.empty()) {
        emit(out, header, body.str());
    } else {
        std::ofstream f = open_output(a.out);
        emit(f, header, body.str());
        if (!f) throw IoError("write failed: '" + a.out + "'");
    }
    return kExitOk;
}

int run_cert(const CLI::App& sub, const CertArgs& a, std::ostream& out) {
    RngStream rng(a.seed);
    std::optional<LinearMap> map;
    if (!a.map_path.empty()) {
        map = read_map(a.map_path, a.rows, a.cols);
    } else {
        map = sample_linear_map(measurements_for(a.mu, a.n), a.n, a.n, rng);
    }
    if (a.rank > std::min(map->n1(), map->n2())) throw DomainError("--rank exceeds the matrix size");
    const ConditionReport rep = sufficient_condition_sample(*map, a.rank, a.trials, rng);

    std::ostringstream body;
    body << "rows=" << map->n1() << "\ncols=" << map->n2() << "\nmeasurements=" << map->rows() << '\n'
         << "rank=" << a.rank << "\ntrials=" << rep.trials << "\nviolations=" << rep.violations << '\n'
         << "boundary=" << rep.boundary << "\nmin_margin=" << fmt(rep.min_margin) << '\n'
         << "pass=" << (rep.pass ? "true" : "false") << '\n';
    bool negative_gap = false;
    if (a.restarts > 0) {
        const Matrix P = random_projector(map->n1(), a.rank, rng);
        const Matrix Q = random_projector(map->n2(), a.rank, rng);
        const double gap = inf_gap_estimate(*map, P, Q, a.restarts, rng, InfGapOptions{a.iterations});
        negative_gap = gap < -kBoundaryTolerance;
        body << "inf_gap=" << fmt(gap) << '\n';
    }
    const std::vector<std::string> header = provenance(sub);
    emit(out, header, body.str());
    if (!a.out.empty()) {
        std::ofstream f = open_output(a.out);
        emit(f, header, body.str());
        if (!f) throw IoError("write failed: '" + a.out + "'");
    }
    return rep.pass && !negative_gap ? kExitOk : kExitViolation;
}

int run_mc(const CLI::App& sub, const McArgs& a, std::ostream& out) {
    RngStream rng(a.seed);
    const NuclearStats s = montecarlo_nuclear_stats(a.dim, a.trials, rng);
    std::ostringstream body;
    body << "dim=" << a.dim << "\ntrials=" << a.trials << "\nmean_nuclear=" << fmt(s.mean_nuclear) << '\n'
         << "stddev=" << fmt(s.stddev) << "\nnormalized=" << fmt(s.normalized) << '\n'
         << "reference=" << fmt(mp_constant()) << "\nexpected_nuclear=" << fmt(expected_nuclear_norm(a.dim)) << '\n';
    const std::vector<std::string> header = provenance(sub);
    emit(out, header, body.str());
    if (!a.out.empty()) {
        std::ofstream f = open_output(a.out);
        emit(f, header, body.str());
        if (!f) throw IoError("write failed: '" + a.out + "'");
    }
    return kExitOk;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].starts_with("--config=")) path = args[i].substr(9);
    }
    if (path.empty() || args.empty() || args[0].starts_with('-')) return args;
    std::vector<std::string> expanded = {args[0]};
    for (std::string& a : config_arguments(path)) expanded.push_back(std::move(a));
    expanded.insert(expanded.end(), args.begin() + 1, args.end());
    return expanded;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    const auto round10 = [](double v) { return std::round(v * 1e10) / 1e10; };
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::istringstream in(text);
        for (std::string p; std::getline(in, p, ':');) parts.push_back(parse_real(p));
        if (parts.size() != 3) throw DomainError("range grid must be start:stop:step");
        const double start = parts[0], stop = parts[1], step = parts[2];
        if (!(step > 0.0) || stop < start) throw DomainError("bad range grid '" + text + "'");
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
        for (long long k = 0; k <= count; ++k) grid.push_back(round10(start + static_cast<double>(k) * step));
    } else {
        std::istringstream in(text);
        for (std::string p; std::getline(in, p, ',');) grid.push_back(parse_real(p));
    }
    if (grid.empty()) throw DomainError("empty grid");
    return grid;
}

std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::vector<std::string> args;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.starts_with('#')) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty() || key == "config") {
            throw DomainError(path + ":" + std::to_string(lineno) + ": bad key '" + key + "'");
        }
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-rank matrix recovery by nuclear-norm minimization", "nucrec"};
    app.require_subcommand(1);
    app.set_version_flag("--version", NUCREC_VERSION);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string config;
    const auto add_config = [&config](CLI::App* sub) {
        sub->add_option("--config", config, "Flat key=value file; command-line flags take precedence");
    };

    SolveArgs sa;
    CLI::App* solve = app.add_subcommand("solve", "Minimize the nuclear norm subject to A vec(X) = b");
    add_config(solve);
    auto* map_opt = solve->add_option("--map", sa.map_path, "Measurement matrix file (m x rows*cols)");
    auto* rhs_opt = solve->add_option("--rhs", sa.rhs_path, "Right-hand side b file (m entries)");
    auto* rows_opt =
        solve->add_option("--rows", sa.rows, "Rows of X (file mode)")->check(CLI::PositiveNumber)->default_str("");
    auto* cols_opt =
        solve->add_option("--cols", sa.cols, "Columns of X (file mode)")->check(CLI::PositiveNumber)->default_str("");
    solve->add_option("--truth", sa.truth_path, "Reference X0 for the recovery verdict (file mode)")->needs(map_opt);
    auto* n_opt = solve->add_option("--n", sa.n, "Planted instance size n")->check(CLI::PositiveNumber);
    auto* rank_opt = solve->add_option("--rank", sa.rank, "Planted rank")->check(CLI::PositiveNumber);
    auto* mu_opt = solve->add_option("--mu", sa.mu, "Planted measurement ratio m/n^2")->check(CLI::Range(0.0, 1.0));
    solve->add_option("--seed", sa.seed, "Root seed for the planted instance");
    solve->add_option("--out", sa.out, "Write the solution matrix here");
    map_opt->needs(rhs_opt)->needs(rows_opt)->needs(cols_opt)->excludes(n_opt)->excludes(rank_opt)->excludes(mu_opt);
    rhs_opt->needs(map_opt);
    add_solver_flags(*solve, sa.solver);

    PhaseArgs pa;
    CLI::App* phase = app.add_subcommand("phase", "Phase-transition sweep over (beta, mu)");
    add_config(phase);
    phase->add_option("--n", pa.n, "Matrix size")->check(CLI::PositiveNumber);
    phase->add_option("--beta-grid", pa.beta_grid, "Rank ratios: list a,b,c or start:stop:step");
    phase->add_option("--mu-grid", pa.mu_grid, "Measurement ratios: list a,b,c or start:stop:step");
    phase->add_option("--repeats", pa.repeats, "Trials per cell")->check(CLI::PositiveNumber);
    phase->add_option("--seed", pa.seed, "Root seed");
    phase->add_option("--threads", pa.threads, "Worker threads (0 = available parallelism)");
    phase->add_option("--out", pa.out, "CSV path (default: standard output)");
    phase->add_option("--svg", pa.svg, "SVG heat map path");
    phase->add_flag("--overlay-weak", pa.overlay_weak, "Draw the weak bound on the heat map");
    phase->add_flag("--overlay-strong", pa.overlay_strong, "Draw the strong bound on the heat map");
    phase->add_flag("--quiet", pa.quiet, "Suppress per-cell log lines");
    add_solver_flags(*phase, pa.solver);

    BoundsArgs ba;
    CLI::App* bounds = app.add_subcommand("bounds", "Weak and strong threshold curves as CSV");
    add_config(bounds);
    bounds->add_option("--points", ba.points, "Number of beta values in [0, 0.5)")->check(CLI::PositiveNumber);
    bounds->add_option("--kind", ba.kind, "Curve selection")->check(CLI::IsMember({"weak", "strong", "both"}));
    bounds->add_option("--out", ba.out, "CSV path (default: standard output)");

    CertArgs ca;
    CLI::App* cert = app.add_subcommand("cert", "Sample the null-space recovery condition of a map");
    add_config(cert);
    auto* cmap_opt = cert->add_option("--map", ca.map_path, "Measurement matrix file (m x rows*cols)");
    auto* crows_opt =
        cert->add_option("--rows", ca.rows, "Rows of X (file mode)")->check(CLI::PositiveNumber)->default_str("");
    auto* ccols_opt =
        cert->add_option("--cols", ca.cols, "Columns of X (file mode)")->check(CLI::PositiveNumber)->default_str("");
    auto* cn_opt = cert->add_option("--n", ca.n, "Sampled map size n")->check(CLI::PositiveNumber);
    auto* cmu_opt =
        cert->add_option("--mu", ca.mu, "Sampled map measurement ratio m/n^2")->check(CLI::Range(0.0, 1.0));
    cert->add_option("--rank", ca.rank, "Rank r of the projectors")->check(CLI::PositiveNumber);
    cert->add_option("--trials", ca.trials, "Sampled (Y, P, Q) triples")->check(CLI::NonNegativeNumber);
    cert->add_option("--restarts", ca.restarts, "Starts of the inf-gap search (0 disables it)")
        ->check(CLI::NonNegativeNumber);
    cert->add_option("--iterations", ca.iterations, "Iterations per inf-gap start")->check(CLI::PositiveNumber);
    cert->add_option("--seed", ca.seed, "Root seed");
    cert->add_option("--out", ca.out, "Also write the report here");
    cmap_opt->needs(crows_opt)->needs(ccols_opt)->excludes(cn_opt)->excludes(cmu_opt);

    McArgs ma;
    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo nuclear norm of D x D Gaussian matrices");
    add_config(mc);
    mc->add_option("--dim", ma.dim, "Matrix size D")->check(CLI::PositiveNumber);
    mc->add_option("--trials", ma.trials, "Number of samples")->check(CLI::Range(2, 1 << 30));
    mc->add_option("--seed", ma.seed, "Root seed");
    mc->add_option("--out", ma.out, "Also write the report here");

    const auto usage = [&](const std::string& message) {
        err << "error: " << message << "\n\n";
        const auto parsed = app.get_subcommands();
        err << (parsed.empty() ? app.help() : parsed.front()->help());
        return kExitUsage;
    };

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed.front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << NUCREC_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return usage(e.what());
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        return usage(e.what());
    }

    try {
        if (solve->parsed()) return run_solve(*solve, sa, out);
        if (phase->parsed()) return run_phase(*phase, pa, out, err);
        if (bounds->parsed()) return run_bounds(*bounds, ba, out);
        if (cert->parsed()) return run_cert(*cert, ca, out);
        if (mc->parsed()) return run_mc(*mc, ma, out);
        return usage("no subcommand");
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DomainError& e) {
        return usage(e.what());
    } catch (const DimensionError& e) {
        return usage(e.what());
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace nucrec::cli
