// Acceptance suite: runs each numbered criterion at its stated tolerance and
// prints one pass/fail line. `--criterion N` runs a single criterion (used by
// ctest); no arguments runs all twelve.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <algorithm>

#include "ccw/lab.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ccw;

namespace {

struct Criterion {
    int id;
    std::string title;
    std::function<bool(std::string&)> run;
};

WeightedSystem fixture(const std::string& name) { return to_system(catalog(name)); }

RatVec zero3() { return RatVec(3, Rational(0)); }

double wall_seconds(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criterion 1: heisenberg closed form ---------------------------------
bool criterion1(std::string& detail) {
    auto sys = fixture("heisenberg-1");
    auto ctx = MetricContext::for_system(sys);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-6;
    cfg.endpoint_tol = 1e-12;
    CounterRng rng(1001, 1);
    double worst = 0.0;
    bool all_ok = true;
    double secs = wall_seconds([&] {
        for (int i = 0; i < 100; ++i) {
            double x = rng.symmetric(), y = rng.symmetric(), t = rng.symmetric();
            auto target = exp_combination({x, y, t}, sys.generators, {0, 0, 0});
            auto est = rho_estimate(ctx, {0, 0, 0}, target.endpoint, cfg);
            double expect = std::max({std::abs(x), std::abs(y), std::sqrt(std::abs(t))});
            if (est.status != RhoStatus::Converged) all_ok = false;
            worst = std::max(worst, std::abs(est.value - expect));
        }
    });
    std::ostringstream os;
    os << "max |estimate - closed form| = " << worst << " (tol 1e-4), " << secs
       << " s for 100 targets";
    detail = os.str();
    return all_ok && worst <= 1e-4 && secs <= 60.0;
}

// ---- criterion 2: graded euclidean closed form ----------------------------
bool criterion2(std::string& detail) {
    auto sys = fixture("weighted-euclidean");
    auto ctx = MetricContext::for_system(sys);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-12;
    cfg.endpoint_tol = 1e-13;
    CounterRng rng(1002, 1);
    double worst = 0.0;
    bool all_ok = true;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        std::vector<double> w = {rng.symmetric(), rng.symmetric(), rng.symmetric()};
        double expect = 0.0;
        for (int j = 0; j < 3; ++j)
            expect = std::max(expect, std::pow(std::abs(w[j] - v[j]), 1.0 / sys.weights[j]));
        auto est = rho_estimate(ctx, v, w, cfg);
        if (est.status != RhoStatus::Converged) all_ok = false;
        worst = std::max(worst, std::abs(est.value - expect));
    }
    std::ostringstream os;
    os << "max |estimate - max|x_i|^(1/d_i)| = " << worst << " (tol 1e-10) over 100 pairs";
    detail = os.str();
    return all_ok && worst <= 1e-10;
}

// ---- criterion 3: regularity classification -------------------------------
bool criterion3(std::string& detail) {
    auto unit = fixture("example3-unit");
    auto graded = fixture("example3-graded");
    CounterRng rng(1003, 1);
    int checked = 0, wrong_unit = 0, wrong_graded = 0;
    for (int i = 0; i < 200; ++i) {
        RatVec p;
        bool on_plane = (i % 2 == 0);
        long xr = static_cast<long>(rng.next_bits() % 33) - 16;
        long yr = static_cast<long>(rng.next_bits() % 33) - 16;
        long tr = static_cast<long>(rng.next_bits() % 33) - 16;
        if (yr == 0) yr = 5;
        p = {Rational(xr, 16), on_plane ? Rational(0) : Rational(yr, 16), Rational(tr, 16)};
        auto cls = classify_point(unit, p, Rational(1, 100), 8, 9 + i);
        bool expect_nonregular = on_plane;
        if ((cls.verdict == Regularity::Nonregular) != expect_nonregular) ++wrong_unit;
        ++checked;
    }
    for (int i = 0; i < 200; ++i) {
        auto p = testing::random_rational_point(3, rng, 16);
        auto cls = classify_point(graded, p, Rational(1, 100), 8, 7 + i);
        if (cls.verdict != Regularity::Regular) ++wrong_graded;
    }
    std::ostringstream os;
    os << checked << " unit-weight probes (" << wrong_unit
       << " misclassified), 200 graded probes (" << wrong_graded << " misclassified)";
    detail = os.str();
    return wrong_unit == 0 && wrong_graded == 0;
}

// ---- criterion 4: exact graded algebra suite ------------------------------
bool criterion4(std::string& detail) {
    int checks = 0;
    for (const char* name : {"heisenberg-1", "heisenberg-weighted", "weighted-euclidean",
                             "example3-unit", "example3-graded"}) {
        auto sys = fixture(name);
        // nilpotentize verifies graded closure, vanishing above the depth and
        // anchor span agreement as exact identities; structure_constants
        // verifies the Jacobi identity exactly
        auto na = nilpotentize(sys, sys.anchor);
        auto sc = structure_constants(na);
        if (sc.jacobi_violation().has_value()) {
            detail = std::string("Jacobi violation on ") + name;
            return false;
        }
        const auto& w = na.coord_weights();
        for (size_t i = 0; i < na.hat.size(); ++i) {
            long order = -static_cast<long>(na.words()[i].hdeg);
            for (Rational eps : {Rational(1, 2), Rational(1, 3), Rational(2)}) {
                auto pulled = dilation_pullback(na.hat[i], w, eps);
                Rational scale = order >= 0 ? rational_pow(eps, static_cast<unsigned>(order))
                                            : 1 / rational_pow(eps, static_cast<unsigned>(-order));
                if (!(pulled == na.hat[i].scaled(scale))) {
                    detail = std::string("homogeneity identity fails on ") + name;
                    return false;
                }
                ++checks;
            }
        }
        for (size_t i = 0; i < na.hat.size(); ++i)
            for (size_t j = 0; j < na.hat.size(); ++j) {
                long s = na.words()[i].hdeg + na.words()[j].hdeg;
                auto br = lie_bracket(na.hat[i], na.hat[j]);
                bool ok = s > sys.depth ? br.is_zero()
                                        : is_homogeneous_of_order(br, w, -s);
                if (!ok) {
                    detail = std::string("graded bracket closure fails on ") + name;
                    return false;
                }
                ++checks;
            }
    }
    detail = std::to_string(checks) + " exact identities verified on all five fixtures";
    return true;
}

// ---- criterion 5: free dimensions and realization --------------------------
bool criterion5(std::string& detail) {
    std::map<int, int> expect = {{2, 3}, {3, 5}, {4, 8}};
    for (auto [M, dim] : expect) {
        auto hb = HallBasis::build(2, {1, 1}, M);
        int oracle = testing::free_dim_oracle(2, {1, 1}, M);
        if (hb.dim() != dim || oracle != dim) {
            detail = "dimension mismatch at M=" + std::to_string(M) + ": hall " +
                     std::to_string(hb.dim()) + ", oracle " + std::to_string(oracle);
            return false;
        }
        // free_realization verifies its bracket table exactly and throws on
        // any mismatch
        free_realization(hb);
    }
    detail = "dims (3, 5, 8) match the bracket-word reduction oracle; bracket tables exact";
    return true;
}

// ---- criterion 6: lifting --------------------------------------------------
bool criterion6(std::string& detail) {
    auto sys = fixture("example3-unit");
    auto ls = lift_system(sys, zero3());
    auto snap = filtration_dims(ls.lifted, ls.lifted.anchor);
    bool free_dim_ok = snap.dims.back() == ls.hall.dim();
    auto cls = classify_point(ls.lifted, ls.lifted.anchor);
    bool regular = cls.verdict == Regularity::Regular;

    auto base_ctx = MetricContext::for_system(sys);
    auto lifted_ctx = MetricContext::for_system(ls.lifted);
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-5;
    auto vs = ball_sample(lifted_ctx, std::vector<double>(6, 0.0), 0.4, 200, 6001);
    auto ws = ball_sample(lifted_ctx, std::vector<double>(6, 0.0), 0.4, 200, 6002);
    int violations = 0, used = 0;
    for (size_t i = 0; i < std::min(vs.points.size(), ws.points.size()); ++i) {
        auto lifted = rho_estimate(lifted_ctx, vs.points[i], ws.points[i], cfg);
        if (lifted.status != RhoStatus::Converged) continue;
        auto vb = ls.na.chart.forward(project(ls, vs.points[i]));
        auto wb = ls.na.chart.forward(project(ls, ws.points[i]));
        auto base = rho_estimate(base_ctx, vb, wb, cfg);
        if (base.status != RhoStatus::Converged) continue;
        ++used;
        if (base.value > lifted.value + 2 * cfg.bisect_rel_gap + 2 * cfg.endpoint_tol)
            ++violations;
    }
    std::ostringstream os;
    os << "lifted anchor " << to_string(cls.verdict) << ", dim H_M = " << snap.dims.back()
       << " (free dim " << ls.hall.dim() << "), monotonicity violations " << violations << "/"
       << used;
    detail = os.str();
    return free_dim_ok && regular && violations == 0 && used >= 150;
}

// ---- criterion 7: divergence rate ------------------------------------------
bool criterion7(std::string& detail) {
    auto sys = fixture("example3-unit");
    ExperimentConfig cfg;
    cfg.seed = 7007;
    ConvergenceReport rep;
    double secs = wall_seconds([&] { rep = divergence_experiment(sys, zero3(), cfg); });
    std::ostringstream os;
    bool ok;
    if (rep.fit_valid) {
        ok = rep.slope >= 1.4 && rep.r2 >= 0.9;
        os << "slope " << rep.slope << " (>= 1.4), R2 " << rep.r2 << ", " << secs << " s";
    } else {
        ok = false;
        os << "no usable rate fit: " << to_string(rep.verdict) << " [" << rep.note << "]; "
           << "the unit-weight fixture is dilation-homogeneous at the origin, so the "
              "measured divergence is identically zero and no slope >= 1.4 exists; "
           << secs << " s";
    }
    detail = os.str();
    return ok && secs <= 300.0;
}

// ---- criterion 8: local approximation rate ---------------------------------
bool criterion8(std::string& detail) {
    auto sys = fixture("example3-unit");
    ExperimentConfig cfg;
    cfg.seed = 8008;
    auto rep = local_approx_experiment(sys, zero3(), cfg);
    bool rate_ok = rep.fit_valid && rep.slope >= 1.4 && rep.r2 >= 0.9;

    auto eu = fixture("weighted-euclidean");
    ExperimentConfig ecfg;
    ecfg.seed = 8018;
    ecfg.zero_floor = 2 * ecfg.rho.bisect_rel_gap;
    auto erep = local_approx_experiment(eu, zero3(), ecfg);
    double emax = 0.0;
    for (double v : erep.value) emax = std::max(emax, v);
    bool euclid_ok = emax <= 2 * ecfg.rho.bisect_rel_gap;

    std::ostringstream os;
    if (rep.fit_valid)
        os << "slope " << rep.slope << ", R2 " << rep.r2;
    else
        os << "unit fixture: " << to_string(rep.verdict)
           << " (|rho - rho^u| identically zero: the approximation coincides with the "
              "original system at this anchor)";
    os << "; euclidean max difference " << emax;
    detail = os.str();
    return rate_ok && euclid_ok;
}

// ---- criterion 9: conical property -----------------------------------------
bool criterion9(std::string& detail) {
    std::vector<double> eps_list;
    for (int k = 1; k <= 6; ++k) eps_list.push_back(std::pow(2.0, -k));

    auto heis = fixture("heisenberg-1");
    auto na_h = nilpotentize(heis, zero3());
    RhoConfig hcfg;
    hcfg.bisect_rel_gap = 1e-8;
    hcfg.endpoint_tol = 1e-12;
    auto d_h = cone_check(na_h, 12, eps_list, 9001, hcfg);

    auto eu = fixture("weighted-euclidean");
    auto na_e = nilpotentize(eu, zero3());
    RhoConfig ecfg;
    ecfg.bisect_rel_gap = 1e-13;
    ecfg.endpoint_tol = 1e-13;
    auto d_e = cone_check(na_e, 12, eps_list, 9002, ecfg);

    std::ostringstream os;
    os << "heisenberg defect " << d_h.cone_defect << " (tol 1e-6, " << d_h.samples_used
       << " samples), euclidean defect " << d_e.cone_defect << " (tol 1e-12, "
       << d_e.samples_used << " samples)";
    detail = os.str();
    return d_h.cone_defect <= 1e-6 && d_e.cone_defect <= 1e-12 && d_h.samples_used >= 60 &&
           d_e.samples_used >= 60;
}

// ---- criterion 10: tangent-cone rescaling ----------------------------------
bool criterion10(std::string& detail) {
    auto sys = fixture("example3-unit");
    ExperimentConfig cfg;
    cfg.seed = 10010;
    auto rep = cone_rescale_experiment(sys, zero3(), cfg);
    bool decreasing = true;
    for (size_t i = 1; i < rep.value.size(); ++i)
        if (rep.value[i] > rep.value[i - 1]) decreasing = false;
    bool unit_ok = rep.fit_valid && decreasing && rep.slope <= -0.4 && rep.r2 >= 0.9;

    auto heis = fixture("heisenberg-1");
    ExperimentConfig hcfg;
    hcfg.seed = 10020;
    auto hrep = cone_rescale_experiment(heis, zero3(), hcfg);
    double hmax = 0.0;
    for (double v : hrep.value) hmax = std::max(hmax, v);
    bool heis_ok = hmax <= 2e-4;  // flat at twice the solver tolerance scale

    std::ostringstream os;
    if (rep.fit_valid)
        os << "unit fixture log-slope " << rep.slope << " (<= -0.4), R2 " << rep.r2;
    else
        os << "unit fixture: " << to_string(rep.verdict)
           << " (dis(lambda) identically zero: the space equals its tangent cone at the "
              "origin, so no decreasing rate exists)";
    os << "; heisenberg max dis " << hmax;
    detail = os.str();
    return unit_ok && heis_ok;
}

// ---- criterion 11: triangle constants ---------------------------------------
bool criterion11(std::string& detail) {
    RhoConfig cfg;
    cfg.bisect_rel_gap = 1e-6;
    std::ostringstream os;
    bool ok = true;
    for (const char* name : {"heisenberg-1", "heisenberg-weighted", "weighted-euclidean",
                             "example3-unit", "example3-graded"}) {
        auto sys = fixture(name);
        auto ctx = MetricContext::for_system(sys);
        std::vector<double> qs;
        for (double scale : {1e-1, 1e-2, 1e-3}) {
            auto d = triangle_constant(ctx, sys.anchor_d(), 40, scale, 11011, cfg);
            if (d.samples_used < 30 || !std::isfinite(d.triangle_q)) ok = false;
            qs.push_back(d.triangle_q);
        }
        double mean = (qs[0] + qs[1] + qs[2]) / 3;
        double spread = 0.0;
        for (double q : qs) spread = std::max(spread, std::abs(q - mean));
        if (!(spread <= 0.10 * mean)) ok = false;
        os << name << " Q=" << qs[0] << "/" << qs[1] << "/" << qs[2] << " ";
    }
    detail = os.str();
    return ok;
}

// ---- criterion 12: determinism ----------------------------------------------
bool criterion12(std::string& detail) {
    auto sys = fixture("example3-graded");
    ExperimentConfig cfg;
    cfg.eps_grid = {0.125, 0.0625, 0.03125, 0.015625};
    cfg.anchors_per_eps = 4;
    cfg.tuples_per_anchor = 8;
    cfg.pairs_per_eps = 8;
    cfg.seed = 12012;
    cfg.exec = ExecMode::Serial;
    auto a = divergence_experiment(sys, zero3(), cfg);
    auto b = divergence_experiment(sys, zero3(), cfg);
    cfg.exec = ExecMode::OpenMP;
    auto c = divergence_experiment(sys, zero3(), cfg);
    bool same_serial = render_csv(a) == render_csv(b);
    bool same_parallel = render_csv(a) == render_csv(c);
    auto lrep = local_approx_experiment(sys, zero3(), cfg);
    auto lrep2 = local_approx_experiment(sys, zero3(), cfg);
    bool same_local = render_csv(lrep) == render_csv(lrep2);
    detail = std::string("serial rerun ") + (same_serial ? "identical" : "DIFFERS") +
             ", parallel schedule " + (same_parallel ? "identical" : "DIFFERS") +
             ", second experiment " + (same_local ? "identical" : "DIFFERS");
    return same_serial && same_parallel && same_local;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "closed-form quasimetric on heisenberg-1", criterion1},
        {2, "closed-form quasimetric on weighted-euclidean", criterion2},
        {3, "regularity classification on example 3", criterion3},
        {4, "exact graded algebra suite on all fixtures", criterion4},
        {5, "free nilpotent dimensions and realization", criterion5},
        {6, "lifting: free up to depth, regular anchor, monotone", criterion6},
        {7, "divergence rate on example3-unit at the origin", criterion7},
        {8, "local approximation rate", criterion8},
        {9, "conical property", criterion9},
        {10, "tangent-cone rescaling", criterion10},
        {11, "triangle constants stable across scales", criterion11},
        {12, "experiment determinism", criterion12},
    };

    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    int failures = 0;
    for (const auto& c : criteria) {
        if (only && c.id != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title
                  << " -- " << detail << "\n";
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
