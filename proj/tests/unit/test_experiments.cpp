#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "nucrec/bounds.hpp"
#include "nucrec/errors.hpp"
#include "nucrec/experiments.hpp"

using namespace nucrec;

namespace {

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() != '#') out.push_back(line);
    }
    return out;
}

std::string csv_of(const PhaseDiagram& d) {
    std::ostringstream out;
    write_csv(out, d);
    return out.str();
}

GridSpec tiny_spec() {
    GridSpec spec;
    spec.n = 8;
    spec.beta_grid = {0.15, 0.3};
    spec.mu_grid = {0.3, 0.6, 1.0};
    spec.repeats = 3;
    spec.root_seed = 99;
    return spec;
}

}  // namespace

TEST_CASE("rank and measurement rounding") {
    CHECK(rank_for(0.05, 20) == 1);
    CHECK(rank_for(0.15, 20) == 3);
    CHECK(rank_for(0.01, 20) == 1);
    CHECK(rank_for(0.45, 20) == 9);
    CHECK(measurements_for(0.6, 10) == 60);
    CHECK(measurements_for(1.0, 20) == 400);
    CHECK(measurements_for(1e-6, 5) == 1);
}

TEST_CASE("identifiability cutoff compares r(2n - r) with m exactly") {
    CHECK(identifiable(1, 39, 20));
    CHECK_FALSE(identifiable(1, 38, 20));
    CHECK(identifiable(9, 400, 20));
    CHECK_FALSE(identifiable(9, 260, 20));
}

TEST_CASE("GridSpec validation") {
    GridSpec spec = tiny_spec();
    CHECK_NOTHROW(spec.validate());
    spec.mu_grid = {0.6, 0.3};
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = tiny_spec();
    spec.beta_grid = {0.5};
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = tiny_spec();
    spec.repeats = 0;
    CHECK_THROWS_AS(spec.validate(), DomainError);

    const GridSpec def = GridSpec::desk_default();
    CHECK(def.n == 20);
    CHECK(def.beta_grid.size() == 9);
    CHECK(def.mu_grid.size() == 19);
    CHECK(def.mu_grid.front() == 0.1);
    CHECK(def.mu_grid.back() == 1.0);
    CHECK(def.beta_grid.back() == 0.45);
    CHECK_NOTHROW(def.validate());
}

TEST_CASE("full measurement cells always succeed") {
    GridSpec spec;
    spec.n = 6;
    spec.beta_grid = {0.15, 0.3, 0.45};
    spec.mu_grid = {1.0};
    spec.repeats = 10;
    const PhaseDiagram d = run_phase_grid(spec, {.threads = 1});
    REQUIRE(d.cells.size() == 3);
    CHECK(d.skipped.empty());
    for (const CellResult& c : d.cells) {
        CHECK(c.successes == 10);
        CHECK(c.attempts == 10);
    }
}

TEST_CASE("cells below the cutoff are skipped and every grid pair is accounted for") {
    const GridSpec spec = tiny_spec();
    const PhaseDiagram d = run_phase_grid(spec, {.threads = 2});
    CHECK(d.cells.size() + d.skipped.size() == spec.beta_grid.size() * spec.mu_grid.size());
    for (const SkippedCell& s : d.skipped) {
        CHECK_FALSE(identifiable(rank_for(s.beta, spec.n), measurements_for(s.mu, spec.n), spec.n));
    }
    for (const CellResult& c : d.cells) {
        CHECK(c.beta_eff * (2.0 - c.beta_eff) <= c.mu_eff + 1e-15);
        CHECK(c.successes <= c.attempts);
    }
}

TEST_CASE("deep inside the weak region: n=20, beta=0.05, mu=0.8 recovers 10/10") {
    GridSpec spec = GridSpec::desk_default();
    spec.beta_grid = {0.05};
    spec.mu_grid = {0.8};
    const PhaseDiagram d = run_phase_grid(spec);
    REQUIRE(d.cells.size() == 1);
    CHECK(d.cells[0].r == 1);
    CHECK(d.cells[0].m == 320);
    CHECK(d.cells[0].successes == 10);
    CHECK(d.nonconverged == 0);
}

TEST_CASE("grid results are independent of thread count and recomputable per cell") {
    const GridSpec spec = tiny_spec();
    const PhaseDiagram one = run_phase_grid(spec, {.threads = 1});
    const PhaseDiagram three = run_phase_grid(spec, {.threads = 3});
    CHECK(csv_of(one) == csv_of(three));

    const CellResult isolated = run_cell(spec, 1, 2);
    const auto it = std::find_if(one.cells.begin(), one.cells.end(),
                                 [](const CellResult& c) { return c.beta == 0.3 && c.mu == 1.0; });
    REQUIRE(it != one.cells.end());
    CHECK(isolated.successes == it->successes);
    CHECK(isolated.mean_rel_error == it->mean_rel_error);
    CHECK(isolated.mean_iterations == it->mean_iterations);
}

TEST_CASE("on_cell callback fires once per solved cell") {
    int calls = 0;
    RunOptions opts;
    opts.threads = 2;
    opts.on_cell = [&](const CellResult&) { ++calls; };
    const PhaseDiagram d = run_phase_grid(tiny_spec(), opts);
    CHECK(calls == static_cast<int>(d.cells.size()));
}

TEST_CASE("Monte Carlo nuclear norm statistics") {
    SUBCASE("D=200 normalized mean approaches 8/(3 pi)") {
        RngStream rng(5);
        const NuclearStats s = montecarlo_nuclear_stats(200, 50, rng);
        CHECK(s.normalized >= 0.83);
        CHECK(s.normalized <= 0.87);
        CHECK(s.mean_nuclear == doctest::Approx(s.normalized * std::pow(200.0, 1.5)));
        CHECK(s.stddev > 0.0);
    }
    SUBCASE("D=1 matches the half-normal mean sqrt(2/pi)") {
        RngStream rng(6);
        const int trials = 100000;
        const NuclearStats s = montecarlo_nuclear_stats(1, trials, rng);
        const double exact = std::sqrt(2.0 / std::numbers::pi);
        const double sem = std::sqrt(1.0 - 2.0 / std::numbers::pi) / std::sqrt(static_cast<double>(trials));
        CHECK(std::abs(s.mean_nuclear - exact) < 3.0 * sem);
    }
    SUBCASE("preconditions") {
        RngStream rng(7);
        CHECK_THROWS_AS(montecarlo_nuclear_stats(10, 1, rng), DomainError);
        CHECK_THROWS_AS(montecarlo_nuclear_stats(0, 10, rng), DomainError);
    }
}

TEST_CASE("CSV export") {
    SUBCASE("empty grid writes only the header") {
        GridSpec spec;
        spec.n = 5;
        const PhaseDiagram d = run_phase_grid(spec);
        const auto lines = data_lines(csv_of(d));
        REQUIRE(lines.size() == 1);
        CHECK(lines[0] == kPhaseCsvHeader);
    }
    SUBCASE("one cell writes two lines with a 4-decimal rate") {
        GridSpec spec;
        spec.n = 5;
        spec.beta_grid = {0.2};
        spec.mu_grid = {1.0};
        spec.repeats = 3;
        const auto lines = data_lines(csv_of(run_phase_grid(spec)));
        REQUIRE(lines.size() == 2);
        CHECK(lines[1].starts_with("5,0.2,1,1,25,3,3,1.0000,"));
    }
    SUBCASE("skipped cells have zero attempts and an empty rate") {
        GridSpec spec;
        spec.n = 10;
        spec.beta_grid = {0.3};
        spec.mu_grid = {0.2};
        const auto lines = data_lines(csv_of(run_phase_grid(spec)));
        REQUIRE(lines.size() == 2);
        CHECK(lines[1] == "10,0.3,0.2,3,20,0,0,,,");
    }
    SUBCASE("provenance header carries seed and grids") {
        const std::string text = csv_of(run_phase_grid(tiny_spec()));
        CHECK(text.find("# root_seed=99\n") != std::string::npos);
        CHECK(text.find("# mu_grid=0.3 0.6 1\n") != std::string::npos);
    }
    SUBCASE("rows are ordered by beta then mu") {
        const auto lines = data_lines(csv_of(run_phase_grid(tiny_spec())));
        REQUIRE(lines.size() == 7);
        CHECK(lines[1].starts_with("8,0.15,0.3,"));
        CHECK(lines[3].starts_with("8,0.15,1,"));
        CHECK(lines[4].starts_with("8,0.3,0.3,"));
    }
}

TEST_CASE("CSV round trip reproduces every cell field") {
    const PhaseDiagram d = run_phase_grid(tiny_spec());
    const auto path = std::filesystem::temp_directory_path() / "nucrec_roundtrip.csv";
    export_csv(d, path, std::vector<std::string>{"extra=1"});
    const PhaseDiagram back = import_csv(path);
    std::filesystem::remove(path);

    REQUIRE(back.cells.size() == d.cells.size());
    CHECK(back.skipped.size() == d.skipped.size());
    CHECK(back.spec.n == d.spec.n);
    CHECK(back.spec.beta_grid == d.spec.beta_grid);
    CHECK(back.spec.mu_grid == d.spec.mu_grid);
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        const CellResult& a = d.cells[i];
        const CellResult& b = back.cells[i];
        CHECK(a.beta == b.beta);
        CHECK(a.mu == b.mu);
        CHECK(a.n == b.n);
        CHECK(a.r == b.r);
        CHECK(a.m == b.m);
        CHECK(a.beta_eff == b.beta_eff);
        CHECK(a.mu_eff == b.mu_eff);
        CHECK(a.successes == b.successes);
        CHECK(a.attempts == b.attempts);
        CHECK(a.mean_rel_error == b.mean_rel_error);
        CHECK(a.mean_iterations == b.mean_iterations);
    }
    CHECK_THROWS_AS(import_csv("/nonexistent/dir/x.csv"), IoError);
    CHECK_THROWS_AS(export_csv(d, "/nonexistent/dir/x.csv"), IoError);
}

namespace {

PhaseDiagram uniform_diagram(int successes) {
    PhaseDiagram d;
    d.spec.n = 10;
    for (double beta : {0.1, 0.2}) {
        for (double mu : {0.5, 0.75, 1.0}) {
            CellResult c;
            c.beta = beta;
            c.mu = mu;
            c.n = 10;
            c.successes = successes;
            c.attempts = 10;
            d.cells.push_back(c);
        }
    }
    return d;
}

std::vector<std::string> cell_fills(const std::string& svg) {
    std::vector<std::string> fills;
    const std::regex re("class=\"cell\"[^>]*fill=\"(#[0-9a-f]{6})\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
        fills.push_back((*it)[1]);
    }
    return fills;
}

}  // namespace

TEST_CASE("heat map fill follows the recovery rate") {
    std::ostringstream white, black;
    write_heatmap_svg(white, uniform_diagram(10), true, true);
    write_heatmap_svg(black, uniform_diagram(0), false, false);

    const auto w = cell_fills(white.str());
    REQUIRE(w.size() == 6);
    for (const auto& f : w) CHECK(f == "#ffffff");
    const auto b = cell_fills(black.str());
    REQUIRE(b.size() == 6);
    for (const auto& f : b) CHECK(f == "#000000");

    CHECK(white.str().find("class=\"weak-bound\"") != std::string::npos);
    CHECK(white.str().find("class=\"strong-bound\"") != std::string::npos);
    CHECK(black.str().find("weak-bound") == std::string::npos);
    CHECK(white.str().starts_with("<svg"));

    CHECK_THROWS_AS(write_heatmap_svg(white, PhaseDiagram{}, true, false), DomainError);
}
