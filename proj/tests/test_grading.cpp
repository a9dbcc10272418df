#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccw/expr_parser.hpp"
#include "ccw/grading.hpp"
#include "support/fixtures.hpp"

using namespace ccw;
using ccw::testing::origin;
using ccw::testing::space;

namespace {

RField rfield(const Chart& chart, const std::vector<std::string>& comps) {
    std::vector<RPoly> ps;
    for (const auto& c : comps) ps.push_back(parse_poly(c, chart.names));
    return RField(chart, ps);
}

}  // namespace

TEST_CASE("privileged chart: euclidean translation and heisenberg closed form") {
    auto eu = space("weighted-euclidean");
    auto chart_eu = privileged_chart(eu, {Rational(1), Rational(2), Rational(3)});
    CHECK(chart_eu.exact());
    CHECK(chart_eu.forward({0.5, -0.5, 0.25}) == std::vector<double>{1.5, 1.5, 3.25});

    auto heis = space("heisenberg-1");
    auto chart = privileged_chart(heis, origin(3));
    CHECK(chart.exact());
    // Phi(x1,x2,x3) = (x1, x2, x3 - x1 x2 / 2) under the rightmost-first
    // composition order
    auto p = chart.forward({0.4, 0.6, 0.2});
    CHECK(p[0] == doctest::Approx(0.4));
    CHECK(p[1] == doctest::Approx(0.6));
    CHECK(p[2] == doctest::Approx(0.2 - 0.4 * 0.6 / 2));
    CHECK(chart.forward({0, 0, 0}) == std::vector<double>{0, 0, 0});
}

TEST_CASE("chart inversion round-trips 100 random points") {
    auto heis = space("heisenberg-1");
    auto chart = privileged_chart(heis, origin(3));
    CounterRng rng(5, 9);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        auto back = chart.inverse(chart.forward(x), 1e-12);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(back[j] - x[j]) <= 1e-10);
    }
}

TEST_CASE("pushforward: euclidean identity, heisenberg and example 3 forms") {
    auto eu = space("weighted-euclidean");
    auto na_eu = nilpotentize(eu, {Rational(1), Rational(2), Rational(3)});
    for (size_t i = 0; i < na_eu.words().size(); ++i)
        if (na_eu.words()[i].word.size() == 1)
            CHECK(na_eu.pushforward.pushed[i] == na_eu.words()[i].field);

    auto heis = space("heisenberg-1");
    auto na = nilpotentize(heis, origin(3));
    const Chart& c = heis.chart;
    for (size_t i = 0; i < na.words().size(); ++i) {
        if (na.words()[i].word == Word{0}) CHECK(na.pushforward.pushed[i] == rfield(c, {"1", "0", "0"}));
        if (na.words()[i].word == Word{1}) CHECK(na.pushforward.pushed[i] == rfield(c, {"0", "1", "x"}));
        if (na.words()[i].word == Word{2}) CHECK(na.pushforward.pushed[i] == rfield(c, {"0", "0", "1"}));
    }

    auto unit = space("example3-unit");
    auto na3 = nilpotentize(unit, origin(3));
    for (size_t i = 0; i < na3.words().size(); ++i)
        if (na3.words()[i].word == Word{1})
            CHECK(na3.pushforward.pushed[i] == rfield(c, {"0", "1", "x"}));
}

TEST_CASE("nilpotent approximations on the fixtures") {
    // commuting fields: hat equals the generator
    auto eu = space("weighted-euclidean");
    auto na_eu = nilpotentize(eu, origin(3));
    for (size_t i = 0; i < na_eu.words().size(); ++i)
        if (na_eu.words()[i].word.size() == 1)
            CHECK(na_eu.hat[i] == na_eu.pushforward.pushed[i]);

    // heisenberg at the origin: every pushforward is already homogeneous
    auto heis = space("heisenberg-1");
    auto na = nilpotentize(heis, origin(3));
    for (size_t i = 0; i < na.words().size(); ++i)
        CHECK(na.hat[i] == na.pushforward.pushed[i]);

    // example 3 with unit weights at the origin is self-similar as well
    auto unit = space("example3-unit");
    auto na3 = nilpotentize(unit, origin(3));
    for (size_t i = 0; i < na3.words().size(); ++i)
        CHECK(na3.hat[i] == na3.pushforward.pushed[i]);
    // bracket of hat generators equals the hat of the bracket word
    const Chart& c = unit.chart;
    int g1 = -1, g2 = -1, br = -1;
    for (size_t i = 0; i < na3.words().size(); ++i) {
        if (na3.words()[i].word == Word{0}) g1 = static_cast<int>(i);
        if (na3.words()[i].word == Word{1}) g2 = static_cast<int>(i);
        if (na3.words()[i].word == Word{0, 1}) br = static_cast<int>(i);
    }
    CHECK(lie_bracket(na3.hat[g1], na3.hat[g2]) == na3.hat[br]);
    CHECK(na3.hat[br] == rfield(c, {"0", "0", "1"}));

    // graded weights drop the redundant generator entirely
    auto graded = space("example3-graded");
    auto nag = nilpotentize(graded, origin(3));
    for (size_t i = 0; i < nag.words().size(); ++i) {
        if (nag.words()[i].word == Word{2}) CHECK(nag.hat[i].is_zero());
        if (nag.words()[i].word == Word{1})
            CHECK(nag.hat[i] == rfield(c, {"0", "1", "x"}));
    }
}

TEST_CASE("hat fields are exactly homogeneous under rational dilations") {
    for (const char* name : {"heisenberg-1", "heisenberg-weighted", "weighted-euclidean",
                             "example3-unit", "example3-graded"}) {
        auto sys = space(name);
        auto na = nilpotentize(sys, sys.anchor);
        const auto& w = na.coord_weights();
        for (size_t i = 0; i < na.hat.size(); ++i) {
            for (Rational eps : {Rational(1, 2), Rational(1, 3)}) {
                auto pulled = dilation_pullback(na.hat[i], w, eps);
                long order = -static_cast<long>(na.words()[i].hdeg);
                Rational scale = 1 / rational_pow(eps, -order);
                CHECK(pulled == na.hat[i].scaled(scale));
            }
        }
    }
}

TEST_CASE("dilations: identity, fixed point, heisenberg closed form") {
    auto heis = space("heisenberg-1");
    auto chart = privileged_chart(heis, origin(3));
    std::vector<double> p = {0.3, -0.4, 0.2};
    auto same = dilate(chart, 1.0, p);
    for (int j = 0; j < 3; ++j) CHECK(same[j] == doctest::Approx(p[j]).epsilon(1e-12));
    auto fixed = dilate(chart, 0.37, {0, 0, 0});
    for (int j = 0; j < 3; ++j) CHECK(std::abs(fixed[j]) <= 1e-12);
    double eps = 0.5;
    auto scaled = dilate(chart, eps, p);
    CHECK(scaled[0] == doctest::Approx(eps * p[0]).epsilon(1e-11));
    CHECK(scaled[1] == doctest::Approx(eps * p[1]).epsilon(1e-11));
    CHECK(scaled[2] == doctest::Approx(eps * eps * p[2]).epsilon(1e-11));
}

TEST_CASE("structure constants across the fixtures") {
    auto eu = space("weighted-euclidean");
    auto sc_eu = structure_constants(nilpotentize(eu, origin(3)));
    CHECK(sc_eu.c.empty());

    auto heis = space("heisenberg-1");
    auto sc = structure_constants(nilpotentize(heis, origin(3)));
    CHECK(sc.get(0, 1, 2) == Rational(1));
    CHECK(sc.get(1, 0, 2) == Rational(-1));
    CHECK(sc.c.size() == 2);

    auto unit = space("example3-unit");
    auto sc3 = structure_constants(nilpotentize(unit, origin(3)));
    CHECK(sc3.get(0, 1, 2) == Rational(1));
    CHECK(sc3.c.size() == 2);
    CHECK_FALSE(sc3.jacobi_violation().has_value());
}

TEST_CASE("bch composition: abelian, heisenberg, flows, associativity") {
    auto eu = space("weighted-euclidean");
    auto sc_eu = structure_constants(nilpotentize(eu, origin(3)));
    auto z = bch_compose<double>(sc_eu, {1, 2, 3}, {4, 5, 6}, eu.depth);
    CHECK(z == std::vector<double>{5, 7, 9});

    auto heis = space("heisenberg-1");
    auto na = nilpotentize(heis, origin(3));
    auto sc = structure_constants(na);
    double t = 0.3, s = 0.7;
    auto zh = bch_compose<double>(sc, {t, 0, 0}, {0, s, 0}, heis.depth);
    CHECK(zh[0] == doctest::Approx(t));
    CHECK(zh[1] == doctest::Approx(s));
    CHECK(zh[2] == doctest::Approx(s * t / 2));

    // agreement with flow composition through the chart
    CounterRng rng(3, 14);
    std::vector<RField> frame = na.hat_frame;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> a = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        std::vector<double> b = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        auto mid = exp_combination(a, frame, {0, 0, 0});
        auto two = exp_combination(b, frame, mid.endpoint);
        auto zc = bch_compose<double>(sc, a, b, heis.depth);
        auto one = exp_combination(zc, frame, {0, 0, 0});
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(one.endpoint[j] - two.endpoint[j]) <= 1e-10);
    }

    // associativity, exact over rationals
    auto sc3 = structure_constants(nilpotentize(space("example3-unit"), origin(3)));
    CounterRng rng2(8, 15);
    for (int trial = 0; trial < 10; ++trial) {
        auto rv = [&](int) {
            std::vector<Rational> v;
            for (int i = 0; i < 3; ++i)
                v.push_back(Rational(static_cast<long>(rng2.next_bits() % 9) - 4, 4));
            return v;
        };
        auto a = rv(0), b = rv(1), c = rv(2);
        auto left = bch_compose<Rational>(sc3, bch_compose<Rational>(sc3, a, b, 2), c, 2);
        auto right = bch_compose<Rational>(sc3, a, bch_compose<Rational>(sc3, b, c, 2), 2);
        CHECK(left == right);
    }
}

TEST_CASE("graded bracket closure and vanishing above the depth") {
    auto sys = space("heisenberg-weighted");
    auto na = nilpotentize(sys, origin(3));
    const auto& w = na.coord_weights();
    for (size_t i = 0; i < na.hat.size(); ++i)
        for (size_t j = 0; j < na.hat.size(); ++j) {
            long s = na.words()[i].hdeg + na.words()[j].hdeg;
            auto br = lie_bracket(na.hat[i], na.hat[j]);
            if (s > sys.depth)
                CHECK(br.is_zero());
            else
                CHECK(is_homogeneous_of_order(br, w, -s));
        }
}

TEST_CASE("non-polynomial frame falls back to the fitted chart") {
    WeightedSystem sys;
    sys.name = "affine-scaling";
    sys.chart = Chart({"x"});
    sys.generators = {RField(sys.chart, {parse_poly("1 + x", {"x"})})};
    sys.weights = {1};
    sys.depth = 1;
    sys.anchor = {Rational(0)};
    validate_system(sys);
    auto chart = privileged_chart(sys, sys.anchor);
    CHECK_FALSE(chart.exact());
    // forward(s) = e^s - 1
    auto f = chart.forward({0.3});
    CHECK(f[0] == doctest::Approx(std::exp(0.3) - 1).epsilon(1e-10));
    auto na = nilpotentize(sys, sys.anchor);
    // the pushforward of (1+x) d/dx through the chart is exactly d/ds
    auto hat_val = na.hat[0].to_double().evaluate(std::vector<double>{0.2});
    CHECK(hat_val[0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("anchor agreement: hat frame values reproduce the frame at u") {
    for (const char* name : {"heisenberg-1", "example3-unit", "example3-graded"}) {
        auto sys = space(name);
        auto na = nilpotentize(sys, sys.anchor);
        RatVec zero(sys.dim(), Rational(0));
        for (size_t i = 0; i < na.hat_frame.size(); ++i) {
            auto hv = na.hat_frame[i].evaluate<Rational>(zero);
            for (int j = 0; j < sys.dim(); ++j)
                CHECK(hv[j] == (static_cast<int>(i) == j ? 1 : 0));
        }
    }
}
