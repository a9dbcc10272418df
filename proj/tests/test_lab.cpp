#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccw/lab.hpp"
#include "support/fixtures.hpp"

using namespace ccw;
using ccw::testing::origin;
using ccw::testing::space;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.eps_grid = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
    cfg.anchors_per_eps = 4;
    cfg.tuples_per_anchor = 12;
    cfg.pairs_per_eps = 12;
    cfg.box_points = 24;
    cfg.seed = 777;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("euclidean fixture: divergence and local approximation are zero") {
    auto sys = space("weighted-euclidean");
    auto cfg = small_config();
    auto div = divergence_experiment(sys, origin(3), cfg);
    CHECK(div.verdict == Verdict::PassZero);
    for (double v : div.value) CHECK(v <= cfg.zero_floor);
    auto loc = local_approx_experiment(sys, origin(3), cfg);
    CHECK(loc.verdict == Verdict::PassZero);
}

TEST_CASE("graded example 3: real convergence rates") {
    auto sys = space("example3-graded");
    auto cfg = small_config();
    cfg.anchors_per_eps = 6;
    cfg.tuples_per_anchor = 16;
    cfg.pairs_per_eps = 16;

    auto div = divergence_experiment(sys, origin(3), cfg);
    CHECK(div.fit_valid);
    CHECK(div.expected_slope == doctest::Approx(1.0 + 1.0 / 3 - 0.1));
    CHECK(div.verdict == Verdict::Pass);

    auto loc = local_approx_experiment(sys, origin(3), cfg);
    CHECK(loc.fit_valid);
    CHECK(loc.verdict == Verdict::Pass);

    auto gro = gromov_convergence_experiment(sys, origin(3), cfg);
    CHECK(gro.fit_valid);
    CHECK(gro.slope >= 0.9);
    CHECK(gro.verdict == Verdict::Pass);

    auto cone = cone_rescale_experiment(sys, origin(3), cfg);
    CHECK(cone.fit_valid);
    CHECK(cone.slope_upper_bound);
    CHECK(cone.verdict == Verdict::Pass);
}

TEST_CASE("heisenberg: approximation coincides, reports are flat zero") {
    auto sys = space("heisenberg-1");
    auto cfg = small_config();
    auto div = divergence_experiment(sys, origin(3), cfg);
    CHECK(div.verdict == Verdict::PassZero);
    auto cone = cone_rescale_experiment(sys, origin(3), cfg);
    for (double v : cone.value) CHECK(v <= 2e-5);
}

TEST_CASE("experiments are deterministic and schedule independent") {
    auto sys = space("example3-graded");
    auto cfg = small_config();
    cfg.eps_grid = {0.125, 0.0625, 0.03125, 0.015625};
    cfg.exec = ExecMode::Serial;
    auto a = local_approx_experiment(sys, origin(3), cfg);
    auto b = local_approx_experiment(sys, origin(3), cfg);
    CHECK(render_csv(a) == render_csv(b));
    cfg.exec = ExecMode::OpenMP;
    auto c = local_approx_experiment(sys, origin(3), cfg);
    CHECK(render_csv(a) == render_csv(c));
}

TEST_CASE("csv schema and emission") {
    ConvergenceReport rep;
    rep.experiment = "divergence";
    rep.space = "demo";
    rep.eps = {0.25, 0.125, 0.0625, 0.03125};
    rep.value = {1e-2, 2.6e-3, 6.4e-4, 1.6e-4};
    rep.n_samples = {10, 10, 10, 10};
    rep.n_failures = {0, 0, 0, 1};
    rep.seed = 42;
    rep.expected_slope = 1.4;
    fit_and_judge(rep, 1e-9);
    CHECK(rep.fit_valid);
    CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.02));
    CHECK(rep.verdict == Verdict::Pass);

    std::string csv = render_csv(rep);
    std::istringstream is(csv);
    std::string header;
    std::getline(is, header);
    CHECK(header == "epsilon,value,n_samples,n_failures,seed");
    std::string row;
    int rows = 0, commas = 0;
    while (std::getline(is, row)) {
        ++rows;
        commas = 0;
        for (char ch : row)
            if (ch == ',') ++commas;
        CHECK(commas == 4);
    }
    CHECK(rows == 4);

    auto dir = std::filesystem::temp_directory_path() / "ccw-lab-test";
    std::filesystem::remove_all(dir);
    emit_report(rep, (dir / "r.csv").string(), (dir / "r.svg").string());
    CHECK(slurp((dir / "r.csv").string()) == csv);
    std::string svg = slurp((dir / "r.svg").string());
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("slope") != std::string::npos);

    ConvergenceReport empty;
    CHECK_THROWS_AS(emit_report(empty, (dir / "no.csv").string(), (dir / "no.svg").string()),
                    UsageError);
    CHECK_FALSE(std::filesystem::exists(dir / "no.csv"));
}

TEST_CASE("golden bytes for a frozen fixed-seed run") {
    auto sys = space("weighted-euclidean");
    ExperimentConfig cfg;
    cfg.eps_grid = {0.25, 0.125, 0.0625, 0.03125};
    cfg.pairs_per_eps = 6;
    cfg.anchors_per_eps = 2;
    cfg.tuples_per_anchor = 4;
    cfg.seed = 2026;
    cfg.exec = ExecMode::Serial;
    auto rep = local_approx_experiment(sys, origin(3), cfg);
    std::string csv = render_csv(rep);
    std::string golden_path = std::string(CCW_GOLDEN_DIR) + "/euclid-local-approx.csv";
    if (!std::filesystem::exists(golden_path)) {
        std::ofstream out(golden_path, std::ios::binary);
        out << csv;
        MESSAGE("golden file created; rerun to compare");
    }
    CHECK(csv == slurp(golden_path));
}

TEST_CASE("inconclusive fits are never silently passed") {
    ConvergenceReport rep;
    rep.experiment = "divergence";
    rep.space = "noise";
    rep.eps = {0.5, 0.25, 0.125, 0.0625, 0.03125};
    rep.value = {1e-3, 4e-3, 0.7e-3, 3e-3, 1.1e-3};  // no trend
    rep.n_samples = {5, 5, 5, 5, 5};
    rep.n_failures = {0, 0, 0, 0, 0};
    rep.expected_slope = 1.0;
    fit_and_judge(rep, 1e-9);
    CHECK(rep.verdict == Verdict::Inconclusive);

    ConvergenceReport few;
    few.eps = {0.5, 0.25, 0.125};
    few.value = {1e-3, 2.5e-4, 6e-5};
    few.n_samples = {5, 5, 5};
    few.n_failures = {0, 0, 0};
    few.expected_slope = 1.0;
    fit_and_judge(few, 1e-9);
    CHECK(few.verdict == Verdict::Inconclusive);
}
