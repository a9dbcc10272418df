#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccw/expr_parser.hpp"
#include "ccw/quasimetric.hpp"
#include "support/fixtures.hpp"

using namespace ccw;
using ccw::testing::origin;
using ccw::testing::space;

namespace {

double heis_closed_form(double x, double y, double t) {
    return std::max({std::abs(x), std::abs(y), std::sqrt(std::abs(t))});
}

WeightedSystem plane2(const std::vector<int>& weights) {
    SpaceSpecDocument doc;
    doc.name = "plane2";
    doc.dim = 2;
    doc.coords = {"x1", "x2"};
    doc.weights = weights;
    doc.anchor = {Rational(0), Rational(0)};
    doc.fields = {{RPoly::constant(2, Rational(1)), RPoly(2)},
                  {RPoly(2), RPoly::constant(2, Rational(1))}};
    doc.depth = weights.back();
    return to_system(doc);
}

}  // namespace

TEST_CASE("rho(v, v) is exactly zero") {
    auto sys = space("weighted-euclidean");
    auto est = rho_estimate(sys, {0.3, -0.4, 0.9}, {0.3, -0.4, 0.9});
    CHECK(est.status == RhoStatus::Converged);
    CHECK(est.value == 0.0);
}

TEST_CASE("euclidean closed form max |x_i|^(1/d_i) to 1e-10") {
    auto sys = space("weighted-euclidean");
    auto ctx = MetricContext::for_system(sys);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-12;
    cfg.endpoint_tol = 1e-13;
    CounterRng rng(401, 2);
    for (int i = 0; i < 25; ++i) {
        std::vector<double> v = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        std::vector<double> w = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        double expect = 0.0;
        for (int j = 0; j < 3; ++j)
            expect = std::max(expect, std::pow(std::abs(w[j] - v[j]), 1.0 / sys.weights[j]));
        auto est = rho_estimate(ctx, v, w, cfg);
        REQUIRE(est.status == RhoStatus::Converged);
        CHECK(std::abs(est.value - expect) <= 1e-10);
    }
}

TEST_CASE("heisenberg closed forms, plain and weighted") {
    auto sys = space("heisenberg-1");
    auto ctx = MetricContext::for_system(sys);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-7;
    cfg.endpoint_tol = 1e-12;
    CounterRng rng(402, 3);
    for (int i = 0; i < 20; ++i) {
        double x = rng.symmetric(), y = rng.symmetric(), t = rng.symmetric();
        auto target = exp_combination({x, y, t}, sys.generators, {0, 0, 0});
        auto est = rho_estimate(ctx, {0, 0, 0}, target.endpoint, cfg);
        REQUIRE(est.status == RhoStatus::Converged);
        CHECK(std::abs(est.value - heis_closed_form(x, y, t)) <= 1e-5);
    }

    auto wsys = space("heisenberg-weighted");
    auto wctx = MetricContext::for_system(wsys);
    for (int i = 0; i < 10; ++i) {
        double x = rng.symmetric(), y = rng.symmetric(), t = rng.symmetric();
        auto target = exp_combination({x, y, t}, wsys.generators, {0, 0, 0});
        double expect = std::max({std::abs(x), std::pow(std::abs(y), 1.0 / 2),
                                  std::pow(std::abs(t), 1.0 / 3)});
        auto est = rho_estimate(wctx, {0, 0, 0}, target.endpoint, cfg);
        REQUIRE(est.status == RhoStatus::Converged);
        CHECK(std::abs(est.value - expect) <= 1e-5);
    }
}

TEST_CASE("rho_u agrees with rho on self-similar fixtures") {
    auto sys = space("heisenberg-1");
    auto na = nilpotentize(sys, origin(3));
    auto ctx = MetricContext::for_system(sys);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-7;
    CounterRng rng(403, 4);
    for (int i = 0; i < 8; ++i) {
        std::vector<double> v = {0.5 * rng.symmetric(), 0.5 * rng.symmetric(),
                                 0.5 * rng.symmetric()};
        std::vector<double> w = {0.5 * rng.symmetric(), 0.5 * rng.symmetric(),
                                 0.5 * rng.symmetric()};
        auto a = rho_estimate(ctx, v, w, cfg);
        auto b = rho_u_estimate(na, v, w, cfg);
        REQUIRE(a.status == RhoStatus::Converged);
        REQUIRE(b.status == RhoStatus::Converged);
        CHECK(std::abs(a.value - b.value) <= 2e-5);
    }
    auto zero = rho_u_estimate(na, {0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}, cfg);
    CHECK(zero.value == 0.0);
}

TEST_CASE("upper-bound soundness: witnesses are feasible and reach the endpoint") {
    auto sys = space("heisenberg-1");
    auto ctx = MetricContext::for_system(sys);
    RhoConfig cfg;
    CounterRng rng(404, 5);
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        std::vector<double> w = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        auto est = rho_estimate(ctx, v, w, cfg);
        REQUIRE(est.status == RhoStatus::Converged);
        CHECK(est.endpoint_residual <= 10 * cfg.endpoint_tol);
        for (int c = 0; c < ctx.control_dim(); ++c)
            CHECK(std::abs(est.controls[c]) <=
                  std::pow(est.value, ctx.hdegs()[c]) * (1 + 1e-9) + 1e-15);
    }
}

TEST_CASE("unreachable endpoints are reported infeasible") {
    WeightedSystem sys;
    sys.name = "halfline";
    sys.chart = Chart({"x"});
    sys.generators = {RField(sys.chart, {parse_poly("x", {"x"})})};
    sys.weights = {1};
    sys.depth = 1;
    sys.anchor = {Rational(1)};
    validate_system(sys);
    auto est = rho_estimate(sys, {1.0}, {-1.0});
    CHECK(est.status == RhoStatus::Infeasible);
}

TEST_CASE("ball samples respect the anisotropic box and reproduce bitwise") {
    auto sys = plane2({1, 2});
    auto ctx = MetricContext::for_system(sys);
    auto s1 = ball_sample(ctx, {0, 0}, 0.5, 64, 99);
    auto s2 = ball_sample(ctx, {0, 0}, 0.5, 64, 99);
    CHECK(s1.points == s2.points);
    for (const auto& p : s1.points) {
        CHECK(std::abs(p[0]) <= 0.5 + 1e-15);
        CHECK(std::abs(p[1]) <= 0.25 + 1e-15);
    }
    auto s3 = ball_sample(ctx, {0, 0}, 1e-6, 16, 99);
    for (const auto& p : s3.points) {
        CHECK(std::abs(p[0]) <= 1e-6 + 1e-18);
        CHECK(std::abs(p[1]) <= 1e-12 + 1e-18);
    }
}

TEST_CASE("triangle constant: euclidean near 1, heisenberg stable across scales") {
    auto eu = space("weighted-euclidean");
    auto ctx = MetricContext::for_system(eu);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-7;
    auto d = triangle_constant(ctx, {0, 0, 0}, 40, 0.1, 7, cfg);
    CHECK(d.samples_used > 30);
    CHECK(d.triangle_q <= 1.0 + 1e-4);
    CHECK(d.symmetry_defect <= 1e-6);

    auto heis = space("heisenberg-1");
    auto hctx = MetricContext::for_system(heis);
    std::vector<double> qs;
    for (double scale : {1e-1, 1e-2, 1e-3}) {
        auto hd = triangle_constant(hctx, {0, 0, 0}, 30, scale, 11, cfg);
        REQUIRE(hd.samples_used > 20);
        qs.push_back(hd.triangle_q);
    }
    double mean = (qs[0] + qs[1] + qs[2]) / 3;
    for (double q : qs) CHECK(std::abs(q - mean) <= 0.1 * mean);
}

TEST_CASE("conical property of rho_u") {
    // eps = 1 gives defect exactly 0 by construction; measure a real grid
    auto eu = space("weighted-euclidean");
    auto na_eu = nilpotentize(eu, origin(3));
    RhoConfig tight;
    tight.bisect_rel_gap = 1e-13;
    tight.endpoint_tol = 1e-13;
    auto d_eu = cone_check(na_eu, 10, {0.5, 0.25, 0.125}, 21, tight);
    CHECK(d_eu.samples_used >= 25);
    CHECK(d_eu.cone_defect <= 1e-12);

    auto heis = space("heisenberg-1");
    auto na_h = nilpotentize(heis, origin(3));
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-8;
    cfg.endpoint_tol = 1e-12;
    std::vector<double> eps_list;
    for (int k = 1; k <= 6; ++k) eps_list.push_back(std::pow(2.0, -k));
    auto d_h = cone_check(na_h, 8, eps_list, 22, cfg);
    CHECK(d_h.samples_used >= 40);
    CHECK(d_h.cone_defect <= 1e-6);
}

TEST_CASE("rolling of the box: xi = 0 and the all-unit euclidean bound") {
    auto sys = plane2({1, 1});
    auto ctx = MetricContext::for_system(sys);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-8;
    auto rep0 = box_inclusion_check(ctx, {0, 0}, 0.25, 0.0, 12, 31, cfg);
    CHECK(rep0.required_radius <= 0.25 * (1 + 1e-6));
    auto rep = box_inclusion_check(ctx, {0, 0}, 0.25, 0.1, 8, 32, cfg);
    CHECK(rep.required_radius <= 0.35 * (1 + 1e-6));
    CHECK(rep.samples >= 60);
}

TEST_CASE("inflation follows r + C xi on the graded euclidean fixture") {
    auto eu = space("weighted-euclidean");
    auto ctx = MetricContext::for_system(eu);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-8;
    for (double r : {0.2, 0.3}) {
        for (double xi : {0.05, 0.1}) {
            auto rep = box_inclusion_check(ctx, {0, 0, 0}, r, xi, 6, 33, cfg);
            // max-norm estimate: per coordinate |x| <= r^d + xi^d <= (r + xi)^d
            CHECK(rep.required_radius <= (r + xi) * (1 + 1e-6));
            CHECK(rep.required_radius >= r * (1 - 1e-6));
        }
    }
}
