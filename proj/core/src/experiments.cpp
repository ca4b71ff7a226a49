#include "nucrec/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include "nucrec/errors.hpp"

#ifndef NUCREC_VERSION
#define NUCREC_VERSION "unknown"
#endif

namespace nucrec {

namespace {

// Values like 0.05 + 0.05 * i rounded to two decimals so grid points print cleanly.
std::vector<double> stepped(double first, double step, int count) {
    std::vector<double> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(std::round((first + step * i) * 100.0) / 100.0);
    return out;
}

std::string format_real(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string format_grid(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += format_real(values[i]);
    }
    return out;
}

double parse_real(const std::string& field, const char* what) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw IoError(std::string("phase csv: bad ") + what + " '" + field + "'");
    }
    return value;
}

int parse_int(const std::string& field, const char* what) {
    int value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw IoError(std::string("phase csv: bad ") + what + " '" + field + "'");
    }
    return value;
}

void require_sorted_in(const std::vector<double>& grid, double lo, double hi, bool lo_open, bool hi_open,
                       const char* what) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = grid[i];
        const bool ok_lo = lo_open ? v > lo : v >= lo;
        const bool ok_hi = hi_open ? v < hi : v <= hi;
        if (!(ok_lo && ok_hi)) throw DomainError(std::string("GridSpec: ") + what + " value out of range");
        if (i > 0 && !(grid[i - 1] < v)) throw DomainError(std::string("GridSpec: ") + what + " must be ascending");
    }
}

}  // namespace

void GridSpec::validate() const {
    if (n < 2) throw DomainError("GridSpec: n must be at least 2");
    if (repeats < 1) throw DomainError("GridSpec: repeats must be at least 1");
    require_sorted_in(mu_grid, 0.0, 1.0, true, false, "mu_grid");
    require_sorted_in(beta_grid, 0.0, 0.5, true, true, "beta_grid");
    solver.validate();
}

GridSpec GridSpec::desk_default() {
    GridSpec spec;
    spec.n = 20;
    spec.beta_grid = stepped(0.05, 0.05, 9);
    spec.mu_grid = stepped(0.10, 0.05, 19);
    spec.repeats = 10;
    return spec;
}

GridSpec GridSpec::smoke() {
    GridSpec spec;
    spec.n = 12;
    spec.beta_grid = {0.1, 0.2, 0.3, 0.4};
    spec.mu_grid = {0.25, 0.5, 0.75, 1.0};
    spec.repeats = 10;
    return spec;
}

int rank_for(double beta, int n) { return std::max(1, static_cast<int>(std::lround(beta * n))); }

int measurements_for(double mu, int n) {
    const long long total = static_cast<long long>(n) * n;
    const long long m = std::llround(mu * static_cast<double>(total));
    return static_cast<int>(std::clamp<long long>(m, 1, total));
}

bool identifiable(int r, int m, int n) {
    return static_cast<long long>(r) * (2LL * n - r) <= static_cast<long long>(m);
}

CellResult run_cell(const GridSpec& spec, std::size_t beta_index, std::size_t mu_index, int* nonconverged) {
    const int n = spec.n;
    CellResult cell;
    cell.beta = spec.beta_grid.at(beta_index);
    cell.mu = spec.mu_grid.at(mu_index);
    cell.n = n;
    cell.r = rank_for(cell.beta, n);
    cell.m = measurements_for(cell.mu, n);
    cell.beta_eff = static_cast<double>(cell.r) / n;
    cell.mu_eff = static_cast<double>(cell.m) / (static_cast<double>(n) * n);

    int stalled = 0;
    double error_sum = 0.0;
    double iteration_sum = 0.0;
    for (int rep = 0; rep < spec.repeats; ++rep) {
        RngStream rng(spec.root_seed, {beta_index, mu_index, static_cast<std::uint64_t>(rep)});
        Matrix planted = sample_low_rank(n, n, cell.r, rng);
        LinearMap map = sample_linear_map(cell.m, n, n, rng);
        const AffineProblem problem = AffineProblem::from_planted(std::move(map), planted);
        const RecoveryResult result = solve_min_nuclear(problem, spec.solver);
        const double err = relative_error(result.X, planted);
        if (!result.converged) ++stalled;
        if (result.converged && err < kRecoveryThreshold) ++cell.successes;
        ++cell.attempts;
        error_sum += err;
        iteration_sum += result.iterations;
    }
    cell.mean_rel_error = error_sum / cell.attempts;
    cell.mean_iterations = iteration_sum / cell.attempts;
    if (nonconverged) *nonconverged = stalled;
    return cell;
}

PhaseDiagram run_phase_grid(const GridSpec& spec, const RunOptions& options) {
    spec.validate();
    PhaseDiagram diagram;
    diagram.spec = spec;

    std::vector<std::pair<std::size_t, std::size_t>> work;
    for (std::size_t bi = 0; bi < spec.beta_grid.size(); ++bi) {
        for (std::size_t mi = 0; mi < spec.mu_grid.size(); ++mi) {
            const int r = rank_for(spec.beta_grid[bi], spec.n);
            const int m = measurements_for(spec.mu_grid[mi], spec.n);
            if (identifiable(r, m, spec.n)) {
                work.emplace_back(bi, mi);
            } else {
                diagram.skipped.push_back(SkippedCell{spec.beta_grid[bi], spec.mu_grid[mi]});
            }
        }
    }

    std::vector<CellResult> results(work.size());
    std::vector<int> stalled(work.size(), 0);
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= work.size()) return;
            try {
                results[k] = run_cell(spec, work[k].first, work[k].second, &stalled[k]);
                if (options.on_cell) {
                    std::lock_guard lock(report_mutex);
                    options.on_cell(results[k]);
                }
            } catch (...) {
                std::lock_guard lock(report_mutex);
                if (!failure) failure = std::current_exception();
                next.store(work.size());
                return;
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(work.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    diagram.cells = std::move(results);
    for (int s : stalled) diagram.nonconverged += s;
    return diagram;
}

NuclearStats montecarlo_nuclear_stats(long long D, int trials, RngStream& rng) {
    if (D < 1) throw DomainError("montecarlo_nuclear_stats: D must be >= 1");
    if (trials < 2) throw DomainError("montecarlo_nuclear_stats: need at least 2 trials");
    std::vector<double> samples;
    samples.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        const auto d = static_cast<Eigen::Index>(D);
        samples.push_back(nuclear_norm(sample_gaussian(d, d, rng)));
    }
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= trials;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= trials - 1;
    return NuclearStats{mean, mean / std::pow(static_cast<double>(D), 1.5), std::sqrt(var)};
}

std::vector<std::string> provenance_lines(const GridSpec& spec) {
    return {
        std::string("# nucrec ") + NUCREC_VERSION,
        "# root_seed=" + std::to_string(spec.root_seed),
        "# n=" + std::to_string(spec.n),
        "# repeats=" + std::to_string(spec.repeats),
        "# beta_grid=" + format_grid(spec.beta_grid),
        "# mu_grid=" + format_grid(spec.mu_grid),
        "# solver.max_iter=" + std::to_string(spec.solver.max_iter),
        "# solver.tol=" + format_real(spec.solver.tol),
        "# solver.penalty=" + format_real(spec.solver.penalty),
        std::string("# solver.adaptive_penalty=") + (spec.solver.adaptive_penalty ? "true" : "false"),
    };
}

void write_csv(std::ostream& out, const PhaseDiagram& d, std::span<const std::string> extra_comments) {
    for (const std::string& line : provenance_lines(d.spec)) out << line << '\n';
    for (const std::string& line : extra_comments) out << (line.starts_with('#') ? "" : "# ") << line << '\n';
    out << kPhaseCsvHeader << '\n';

    // Merge solved and skipped pairs into (beta, mu) order.
    struct Row {
        const CellResult* cell;
        SkippedCell skipped;
    };
    std::vector<Row> rows;
    rows.reserve(d.cells.size() + d.skipped.size());
    for (const CellResult& c : d.cells) rows.push_back(Row{&c, {c.beta, c.mu}});
    for (const SkippedCell& s : d.skipped) rows.push_back(Row{nullptr, s});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::pair(a.skipped.beta, a.skipped.mu) < std::pair(b.skipped.beta, b.skipped.mu);
    });

    char rate[32];
    for (const Row& row : rows) {
        if (row.cell) {
            const CellResult& c = *row.cell;
            std::snprintf(rate, sizeof(rate), "%.4f", static_cast<double>(c.successes) / c.attempts);
            out << c.n << ',' << format_real(c.beta) << ',' << format_real(c.mu) << ',' << c.r << ',' << c.m << ','
                << c.successes << ',' << c.attempts << ',' << rate << ',' << format_real(c.mean_rel_error) << ','
                << format_real(c.mean_iterations) << '\n';
        } else {
            const int n = d.spec.n;
            out << n << ',' << format_real(row.skipped.beta) << ',' << format_real(row.skipped.mu) << ','
                << rank_for(row.skipped.beta, n) << ',' << measurements_for(row.skipped.mu, n) << ",0,0,,,\n";
        }
    }
}

void export_csv(const PhaseDiagram& d, const std::filesystem::path& path, std::span<const std::string> extra_comments) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_csv(out, d, extra_comments);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

PhaseDiagram read_csv(std::istream& in) {
    PhaseDiagram d;
    d.spec.beta_grid.clear();
    d.spec.mu_grid.clear();
    std::string line;
    bool header_seen = false;
    std::vector<double> betas, mus;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kPhaseCsvHeader) throw IoError("phase csv: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != 10) throw IoError("phase csv: expected 10 fields in '" + line + "'");

        const int n = parse_int(fields[0], "n");
        const double beta = parse_real(fields[1], "beta");
        const double mu = parse_real(fields[2], "mu");
        d.spec.n = n;
        betas.push_back(beta);
        mus.push_back(mu);
        const int attempts = parse_int(fields[6], "attempts");
        if (attempts == 0) {
            d.skipped.push_back(SkippedCell{beta, mu});
            continue;
        }
        CellResult c;
        c.beta = beta;
        c.mu = mu;
        c.n = n;
        c.r = parse_int(fields[3], "r");
        c.m = parse_int(fields[4], "m");
        c.beta_eff = static_cast<double>(c.r) / n;
        c.mu_eff = static_cast<double>(c.m) / (static_cast<double>(n) * n);
        c.successes = parse_int(fields[5], "successes");
        c.attempts = attempts;
        c.mean_rel_error = parse_real(fields[8], "mean_rel_error");
        c.mean_iterations = parse_real(fields[9], "mean_iterations");
        d.cells.push_back(c);
    }
    if (!header_seen) throw IoError("phase csv: missing header");
    auto unique_sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    d.spec.beta_grid = unique_sorted(std::move(betas));
    d.spec.mu_grid = unique_sorted(std::move(mus));
    return d;
}

PhaseDiagram import_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    try {
        return read_csv(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace nucrec
