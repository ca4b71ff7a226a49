#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nucrec/ensemble.hpp"
#include "nucrec/recovery.hpp"

namespace nucrec {

/// Phase-transition sweep over normalized rank beta and normalized
/// measurement count mu for n x n planted problems.
struct GridSpec {
    int n = 20;
    std::vector<double> mu_grid;
    std::vector<double> beta_grid;
    int repeats = 10;
    std::uint64_t root_seed = 1;
    SolverConfig solver;

    /// Throws DomainError on unsorted grids or out-of-range values.
    void validate() const;

    /// n = 20, beta in {0.05, ..., 0.45}, mu in {0.10, 0.15, ..., 1.00}, 10 repeats.
    static GridSpec desk_default();
    /// n = 12, beta in {0.1, 0.2, 0.3, 0.4}, mu in {0.25, 0.5, 0.75, 1.0}.
    static GridSpec smoke();
};

/// r = max(1, round(beta n)).
int rank_for(double beta, int n);
/// m = round(mu n^2), clamped to [1, n^2].
int measurements_for(double mu, int n);
/// beta_eff (2 - beta_eff) <= mu_eff, evaluated exactly as r (2n - r) <= m.
bool identifiable(int r, int m, int n);

struct CellResult {
    double beta = 0.0;  // grid value
    double mu = 0.0;    // grid value
    int n = 0;
    int r = 0;
    int m = 0;
    double beta_eff = 0.0;  // r / n
    double mu_eff = 0.0;    // m / n^2
    int successes = 0;
    int attempts = 0;
    double mean_rel_error = 0.0;
    double mean_iterations = 0.0;
};

struct SkippedCell {
    double beta = 0.0;
    double mu = 0.0;
};

struct PhaseDiagram {
    GridSpec spec;
    /// Solved cells in (beta asc, mu asc) order.
    std::vector<CellResult> cells;
    /// Grid pairs rejected by the identifiability cutoff.
    std::vector<SkippedCell> skipped;
    /// Repetitions whose solve hit max_iter (each also counted as a failure).
    int nonconverged = 0;
};

struct RunOptions {
    /// 0 means std::thread::hardware_concurrency().
    unsigned threads = 0;
    /// Invoked once per finished cell, serialized, in completion order.
    std::function<void(const CellResult&)> on_cell;
};

/// Runs `repeats` planted recoveries in every identifiable cell. Repetition k
/// of cell (i, j) draws from RngStream(root_seed, {i, j, k}), so results do
/// not depend on thread count or scheduling.
PhaseDiagram run_phase_grid(const GridSpec& spec, const RunOptions& options = {});

/// One cell in isolation; `nonconverged` (optional) receives the number of
/// solves that hit max_iter.
CellResult run_cell(const GridSpec& spec, std::size_t beta_index, std::size_t mu_index, int* nonconverged = nullptr);

struct NuclearStats {
    double mean_nuclear = 0.0;
    double normalized = 0.0;  // mean / D^{3/2}
    double stddev = 0.0;      // sample standard deviation
};

/// Monte Carlo nuclear-norm statistics of D x D standard Gaussian matrices.
NuclearStats montecarlo_nuclear_stats(long long D, int trials, RngStream& rng);

inline constexpr const char* kPhaseCsvHeader =
    "n,beta,mu,r,m,successes,attempts,rate,mean_rel_error,mean_iterations";

/// '#'-prefixed provenance lines describing the grid and solver settings.
std::vector<std::string> provenance_lines(const GridSpec& spec);

/// Phase CSV: provenance comments (plus `extra_comments`), the header, then
/// one row per grid pair in (beta asc, mu asc) order. Skipped pairs have
/// attempts = 0 and an empty rate.
void write_csv(std::ostream& out, const PhaseDiagram& d, std::span<const std::string> extra_comments = {});
void export_csv(const PhaseDiagram& d, const std::filesystem::path& path,
                std::span<const std::string> extra_comments = {});

/// Reads a phase CSV back. Grid vectors and n are reconstructed from the rows;
/// solver settings are not.
PhaseDiagram read_csv(std::istream& in);
PhaseDiagram import_csv(const std::filesystem::path& path);

/// SVG heat map on beta in [0, 0.5] x mu in [0, 1]; white is rate 1, black is
/// rate 0. Optional bound curves are drawn as polylines.
void write_heatmap_svg(std::ostream& out, const PhaseDiagram& d, bool overlay_weak, bool overlay_strong);
void render_heatmap(const PhaseDiagram& d, bool overlay_weak, bool overlay_strong, const std::filesystem::path& path);

}  // namespace nucrec
