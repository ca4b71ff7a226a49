#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nucrec/nucrec.hpp"
#include "nucrec_cli/cli.hpp"

using namespace nucrec;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path tmp(const std::string& name) { return std::filesystem::path(NUCREC_TEST_TMPDIR) / name; }

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && !line.starts_with('#')) lines.push_back(line);
    }
    return lines;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("solve on a planted instance deep inside the recoverable region") {
    const Run r = run({"solve", "--n", "10", "--rank", "1", "--mu", "0.8", "--seed", "7"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("verdict=recovered\n") != std::string::npos);
    CHECK(r.out.find("converged=true") != std::string::npos);
    CHECK(r.out.starts_with("# nucrec "));
    CHECK(r.out.find("# seed=7") != std::string::npos);
}

TEST_CASE("solve reports non-convergence with exit code 2") {
    const Run r = run({"solve", "--n", "10", "--rank", "3", "--mu", "0.5", "--max-iter", "3"});
    CHECK(r.code == cli::kExitNotConverged);
    CHECK(r.out.find("converged=false") != std::string::npos);
}

TEST_CASE("solve from files") {
    RngStream rng(3);
    const Matrix x0 = sample_low_rank(5, 4, 1, rng);
    const LinearMap map = sample_linear_map(20, 5, 4, rng);
    save_matrix(tmp("cli_map.txt"), map.matrix());
    save_matrix(tmp("cli_rhs.txt"), map.apply(x0));
    save_matrix(tmp("cli_truth.txt"), x0);

    const Run r = run({"solve", "--map", tmp("cli_map.txt").string(), "--rhs", tmp("cli_rhs.txt").string(), "--rows",
                       "5", "--cols", "4", "--truth", tmp("cli_truth.txt").string(), "--out",
                       tmp("cli_x.txt").string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("mode=file") != std::string::npos);
    CHECK(r.out.find("verdict=recovered") != std::string::npos);
    const Matrix x = load_matrix(tmp("cli_x.txt"));
    CHECK(relative_error(x, x0) < 1e-3);
    CHECK(slurp(tmp("cli_x.txt")).starts_with("# nucrec "));

    SUBCASE("dimension mismatch is a usage error") {
        const Run bad = run({"solve", "--map", tmp("cli_map.txt").string(), "--rhs", tmp("cli_rhs.txt").string(),
                             "--rows", "4", "--cols", "4"});
        CHECK(bad.code == cli::kExitUsage);
    }
    SUBCASE("missing file is an I/O error") {
        const Run bad = run({"solve", "--map", tmp("missing.txt").string(), "--rhs", tmp("cli_rhs.txt").string(),
                             "--rows", "5", "--cols", "4"});
        CHECK(bad.code == cli::kExitIo);
    }
    SUBCASE("file and planted modes are exclusive") {
        const Run bad = run({"solve", "--map", tmp("cli_map.txt").string(), "--rhs", tmp("cli_rhs.txt").string(),
                             "--rows", "5", "--cols", "4", "--n", "5"});
        CHECK(bad.code == cli::kExitUsage);
    }
}

TEST_CASE("phase with mu = 1 only recovers every cell") {
    const Run r = run({"phase", "--n", "8", "--beta-grid", "0.125,0.25,0.375", "--mu-grid", "1.0", "--repeats", "3",
                       "--quiet"});
    CHECK(r.code == cli::kExitOk);
    const std::vector<std::string> lines = data_lines(r.out);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == kPhaseCsvHeader);
    for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i].find(",3,3,1.0000,") != std::string::npos);
    CHECK(r.err.find("cell ") == std::string::npos);
}

TEST_CASE("phase writes CSV and SVG files with provenance") {
    const Run r = run({"phase", "--n", "8", "--beta-grid", "0.125", "--mu-grid", "0.5,1", "--repeats", "2", "--out",
                       tmp("cli_phase.csv").string(), "--svg", tmp("cli_phase.svg").string(), "--overlay-weak",
                       "--overlay-strong"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.err.find("cell beta=0.125 mu=0.5") != std::string::npos);
    const PhaseDiagram d = import_csv(tmp("cli_phase.csv"));
    CHECK(d.cells.size() == 2);
    const std::string svg = slurp(tmp("cli_phase.svg"));
    CHECK(svg.starts_with("<!--\n# nucrec "));
    CHECK(svg.find("weak-bound") != std::string::npos);
    CHECK(svg.find("strong-bound") != std::string::npos);
}

TEST_CASE("phase output is deterministic given the seed and independent of threads") {
    const std::vector<std::string> base = {"phase", "--n", "8", "--beta-grid", "0.125,0.25", "--mu-grid",
                                           "0.4:1:0.3", "--repeats", "2", "--seed", "5", "--quiet"};
    std::vector<std::string> one = base, three = base;
    one.insert(one.end(), {"--threads", "1"});
    three.insert(three.end(), {"--threads", "3"});
    const Run a = run(one);
    const Run b = run(three);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    std::vector<std::string> other = base;
    other[10] = "6";
    other[9] = "--seed";
    CHECK(run(other).out != a.out);
}

TEST_CASE("bounds --points 3") {
    const Run both = run({"bounds", "--points", "3"});
    CHECK(both.code == cli::kExitOk);
    const std::vector<std::string> lines = data_lines(both.out);
    REQUIRE(lines.size() == 8);
    CHECK(lines[0] == "beta,mu,kind");
    CHECK(lines[1] == "0,0.279494,weak");
    CHECK(lines[4] == "beta,mu,kind");
    CHECK(lines[5] == "0,0.279494,strong");

    const Run weak = run({"bounds", "--points", "3", "--kind", "weak"});
    CHECK(data_lines(weak.out).size() == 4);
    CHECK(run({"bounds", "--kind", "medium"}).code == cli::kExitUsage);
}

TEST_CASE("mc prints the reference constant") {
    const Run r = run({"mc", "--dim", "30", "--trials", "5", "--seed", "2"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("reference=0.848826363156775") != std::string::npos);
    CHECK(r.out.find("normalized=") != std::string::npos);
    CHECK(run({"mc", "--dim", "30", "--trials", "5", "--seed", "2"}).out == r.out);
    CHECK(run({"mc", "--trials", "1"}).code == cli::kExitUsage);
}

TEST_CASE("cert exit codes") {
    const Run ok = run({"cert", "--n", "10", "--mu", "0.8", "--rank", "1", "--trials", "50", "--restarts", "1",
                        "--iterations", "100", "--seed", "2"});
    CHECK(ok.code == cli::kExitOk);
    CHECK(ok.out.find("violations=0") != std::string::npos);
    CHECK(ok.out.find("pass=true") != std::string::npos);
    CHECK(ok.out.find("inf_gap=") != std::string::npos);

    const Run bad = run({"cert", "--n", "10", "--mu", "0.2", "--rank", "2", "--trials", "50", "--restarts", "4",
                         "--iterations", "200", "--seed", "1"});
    CHECK(bad.code == cli::kExitViolation);
}

TEST_CASE("usage errors and help") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    const Run unknown = run({"solve", "--no-such-flag"});
    CHECK(unknown.code == cli::kExitUsage);
    CHECK(unknown.err.find("Usage:") != std::string::npos);
    CHECK(run({"solve", "--n", "ten"}).code == cli::kExitUsage);

    CHECK(run({"--help"}).code == cli::kExitOk);
    for (const char* sub : {"solve", "phase", "bounds", "cert", "mc"}) {
        const Run h = run({sub, "--help"});
        CHECK(h.code == cli::kExitOk);
        CHECK(h.out.find("--config") != std::string::npos);
        CHECK(h.out.find("Usage:") != std::string::npos);
    }
    const Run phase_help = run({"phase", "--help"});
    CHECK(phase_help.out.find("[0.05:0.45:0.05]") != std::string::npos);
    CHECK(phase_help.out.find("--threads") != std::string::npos);
}

TEST_CASE("config files are overridden by flags") {
    {
        std::ofstream f(tmp("cli.cfg"));
        f << "# comment\n\nn = 6\nmu=0.9\nseed=3\nkind=\"weak\"\n";
    }
    const Run r = run({"solve", "--config", tmp("cli.cfg").string(), "--seed", "4"});
    CHECK(r.code == cli::kExitUsage);  // kind is not a solve option

    {
        std::ofstream f(tmp("cli.cfg"));
        f << "n=6\nmu=0.9\nseed=3\n";
    }
    const Run s = run({"solve", "--config", tmp("cli.cfg").string(), "--seed", "4"});
    CHECK(s.code == cli::kExitOk);
    CHECK(s.out.find("# n=6") != std::string::npos);
    CHECK(s.out.find("# seed=4") != std::string::npos);
    CHECK(s.out == run({"solve", "--n", "6", "--mu", "0.9", "--seed", "4"}).out);

    {
        std::ofstream f(tmp("cli.cfg"));
        f << "points 3\n";
    }
    CHECK(run({"bounds", "--config", tmp("cli.cfg").string()}).code == cli::kExitUsage);
    CHECK(run({"bounds", "--config", tmp("absent.cfg").string()}).code == cli::kExitIo);
}

TEST_CASE("provenance settings round-trip as a config file") {
    const Run first = run({"solve", "--n", "7", "--mu", "0.7", "--seed", "11", "--tol", "1e-8", "--fixed-penalty"});
    {
        // Skip the version and command lines.
        std::ofstream f(tmp("cli_prov.cfg"));
        std::istringstream in(first.out);
        int index = 0;
        for (std::string line; std::getline(in, line); ++index) {
            if (index >= 2 && line.starts_with("# ")) f << line.substr(2) << '\n';
        }
    }
    const Run second = run({"solve", "--config", tmp("cli_prov.cfg").string()});
    CHECK(second.code == cli::kExitOk);
    CHECK(second.out == first.out);
}

TEST_CASE("grid parsing") {
    CHECK(cli::parse_grid("0.1,0.2") == std::vector<double>{0.1, 0.2});
    CHECK(cli::parse_grid("0.05:0.45:0.05") == GridSpec::desk_default().beta_grid);
    CHECK(cli::parse_grid("0.10:1.00:0.05") == GridSpec::desk_default().mu_grid);
    CHECK(cli::parse_grid("1") == std::vector<double>{1.0});
    CHECK_THROWS_AS(cli::parse_grid("0.1:0.2"), DomainError);
    CHECK_THROWS_AS(cli::parse_grid("0.1,x"), DomainError);
    CHECK_THROWS_AS(cli::parse_grid("0.5:0.1:0.1"), DomainError);
}
