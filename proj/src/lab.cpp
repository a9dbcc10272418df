#include "ccw/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccw/errors.hpp"
#include "ccw/rng.hpp"

namespace ccw {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "Pass";
        case Verdict::PassZero: return "Pass (identically zero within tolerance)";
        case Verdict::Fail: return "Fail";
        default: return "Inconclusive";
    }
}

double theoretical_rate(const WeightedSystem& sys) {
    int d1 = sys.weights.front();
    int dq = sys.weights.back();
    return 1.0 + static_cast<double>(d1) / std::max(dq, sys.depth);
}

namespace {

std::string fmt_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

void validate_grid(const ExperimentConfig& cfg) {
    if (cfg.eps_grid.empty()) throw UsageError("epsilon grid is empty");
    for (size_t i = 0; i < cfg.eps_grid.size(); ++i) {
        if (!(cfg.eps_grid[i] > 0)) throw UsageError("epsilon grid must be positive");
        if (i > 0 && cfg.eps_grid[i] >= cfg.eps_grid[i - 1])
            throw UsageError("epsilon grid must be strictly decreasing");
    }
}

struct SampleOutcome {
    double value = 0.0;
    bool ok = false;
};

// shared scaffolding: the original-field and hat-field control sets matched
// word by word (a hat field may be zero while the original is not)
struct DivergenceSetup {
    NilpotentApproximation na;
    MetricContext rho_ctx;
    MetricContext hat_ctx;
    std::vector<DField> flow_fields;      // original fields for the words
    std::vector<DField> flow_hat_fields;  // hat fields for the same words
    std::vector<int> hdegs;
};

DivergenceSetup divergence_setup(const WeightedSystem& sys, const RatVec& u,
                                 const RhoConfig& rho_cfg) {
    DivergenceSetup s{nilpotentize(sys, u, rho_cfg.flow),
                      MetricContext::for_system(sys, rho_cfg.flow), MetricContext{}, {}, {}, {}};
    s.hat_ctx = MetricContext::for_approximation(s.na, rho_cfg.flow);
    // controls over the rho context words; hat fields matched by word
    for (size_t i = 0; i < s.rho_ctx.words().size(); ++i) {
        const Word& w = s.rho_ctx.words()[i];
        s.flow_fields.push_back(s.rho_ctx.fields()[i].to_double());
        int pos = -1;
        for (size_t j = 0; j < s.na.words().size(); ++j)
            if (s.na.words()[j].word == w) pos = static_cast<int>(j);
        if (pos < 0) throw StructuralDefect("context word missing from the enumeration");
        s.flow_hat_fields.push_back(s.na.hat[pos].to_double());
        s.hdegs.push_back(s.rho_ctx.hdegs()[i]);
    }
    return s;
}

}  // namespace

ConvergenceReport divergence_experiment(const WeightedSystem& sys, const RatVec& u,
                                        const ExperimentConfig& cfg) {
    validate_grid(cfg);
    auto setup = divergence_setup(sys, u, cfg.rho);
    ConvergenceReport rep;
    rep.experiment = "divergence";
    rep.space = sys.name;
    rep.seed = cfg.seed;
    rep.expected_slope = theoretical_rate(sys) - 0.1;

    const int k = static_cast<int>(setup.flow_fields.size());
    auto u_d = sys.anchor_d();

    for (size_t gi = 0; gi < cfg.eps_grid.size(); ++gi) {
        double eps = cfg.eps_grid[gi];
        auto anchors = ball_sample(setup.rho_ctx, u_d, eps, cfg.anchors_per_eps,
                                   cfg.seed + 100 * gi);
        const int total = static_cast<int>(anchors.points.size()) * cfg.tuples_per_anchor;
        std::vector<SampleOutcome> out(total);
        run_indexed(
            total,
            [&](size_t idx) {
                int ai = static_cast<int>(idx) / cfg.tuples_per_anchor;
                int ti = static_cast<int>(idx) % cfg.tuples_per_anchor;
                const auto& v = anchors.points[ai];
                CounterRng rng(cfg.seed + 17, (gi + 1) * 1000003ULL + idx);
                std::vector<double> b(k);
                for (int c = 0; c < k; ++c)
                    b[c] = std::pow(eps, setup.hdegs[c]) * rng.symmetric();
                (void)ti;
                try {
                    auto y = exp_combination(b, setup.flow_fields, v, cfg.rho.flow).endpoint;
                    auto v_chart = setup.na.chart.inverse(v);
                    auto yhat_chart =
                        exp_combination(b, setup.flow_hat_fields, v_chart, cfg.rho.flow)
                            .endpoint;
                    auto y_chart = setup.na.chart.inverse(y);
                    auto yhat = setup.na.chart.forward(yhat_chart);
                    auto r_u = rho_estimate(setup.hat_ctx, y_chart, yhat_chart, cfg.rho);
                    auto r_o = rho_estimate(setup.rho_ctx, y, yhat, cfg.rho);
                    if (r_u.status == RhoStatus::Converged &&
                        r_o.status == RhoStatus::Converged) {
                        out[idx].value = std::max(r_u.value, r_o.value);
                        out[idx].ok = true;
                    }
                } catch (const NumericFailure&) {
                }
            },
            cfg.exec);
        double worst = 0.0;
        int good = 0, bad = anchors.failures * cfg.tuples_per_anchor;
        for (const auto& o : out) {
            if (o.ok) {
                worst = std::max(worst, o.value);
                ++good;
            } else {
                ++bad;
            }
        }
        rep.eps.push_back(eps);
        rep.value.push_back(worst);
        rep.n_samples.push_back(good);
        rep.n_failures.push_back(bad);
    }
    fit_and_judge(rep, cfg.zero_floor);
    return rep;
}

ConvergenceReport local_approx_experiment(const WeightedSystem& sys, const RatVec& u,
                                          const ExperimentConfig& cfg) {
    validate_grid(cfg);
    auto setup = divergence_setup(sys, u, cfg.rho);
    ConvergenceReport rep;
    rep.experiment = "local-approx";
    rep.space = sys.name;
    rep.seed = cfg.seed;
    rep.expected_slope = theoretical_rate(sys) - 0.1;
    auto u_d = sys.anchor_d();

    for (size_t gi = 0; gi < cfg.eps_grid.size(); ++gi) {
        double eps = cfg.eps_grid[gi];
        auto vs = ball_sample(setup.rho_ctx, u_d, eps, cfg.pairs_per_eps, cfg.seed + 100 * gi);
        auto ws = ball_sample(setup.rho_ctx, u_d, eps, cfg.pairs_per_eps,
                              cfg.seed + 100 * gi + 57);
        const int total = static_cast<int>(std::min(vs.points.size(), ws.points.size()));
        std::vector<SampleOutcome> out(total);
        run_indexed(
            total,
            [&](size_t idx) {
                try {
                    const auto& v = vs.points[idx];
                    const auto& w = ws.points[idx];
                    auto r_o = rho_estimate(setup.rho_ctx, v, w, cfg.rho);
                    auto r_u = rho_estimate(setup.hat_ctx, setup.na.chart.inverse(v),
                                            setup.na.chart.inverse(w), cfg.rho);
                    if (r_o.status == RhoStatus::Converged &&
                        r_u.status == RhoStatus::Converged) {
                        out[idx].value = std::abs(r_o.value - r_u.value);
                        out[idx].ok = true;
                    }
                } catch (const NumericFailure&) {
                }
            },
            cfg.exec);
        double worst = 0.0;
        int good = 0, bad = vs.failures + ws.failures;
        for (const auto& o : out) {
            if (o.ok) {
                worst = std::max(worst, o.value);
                ++good;
            } else {
                ++bad;
            }
        }
        rep.eps.push_back(eps);
        rep.value.push_back(worst);
        rep.n_samples.push_back(good);
        rep.n_failures.push_back(bad);
    }
    fit_and_judge(rep, cfg.zero_floor);
    return rep;
}

ConvergenceReport cone_rescale_experiment(const WeightedSystem& sys, const RatVec& u,
                                          const ExperimentConfig& cfg) {
    validate_grid(cfg);
    auto setup = divergence_setup(sys, u, cfg.rho);
    ConvergenceReport rep;
    rep.experiment = "cone-rescale";
    rep.space = sys.name;
    rep.seed = cfg.seed;
    rep.expected_slope = -(1.0 / sys.depth - 0.1);
    rep.slope_upper_bound = true;
    const auto& weights = setup.na.coord_weights();
    std::vector<double> origin(sys.dim(), 0.0);

    // pairs in the unit hat-box, reused across the lambda grid
    auto vs = ball_sample(setup.hat_ctx, origin, 0.5, cfg.pairs_per_eps, cfg.seed + 3);
    auto ws = ball_sample(setup.hat_ctx, origin, 0.5, cfg.pairs_per_eps, cfg.seed + 11);
    const int pairs = static_cast<int>(std::min(vs.points.size(), ws.points.size()));

    for (size_t gi = 0; gi < cfg.eps_grid.size(); ++gi) {
        double lambda = 1.0 / cfg.eps_grid[gi];
        std::vector<SampleOutcome> out(pairs);
        run_indexed(
            pairs,
            [&](size_t idx) {
                try {
                    auto base = rho_estimate(setup.hat_ctx, vs.points[idx], ws.points[idx],
                                             cfg.rho);
                    if (base.status != RhoStatus::Converged) return;
                    auto v_m = setup.na.chart.forward(
                        dilate_chart(weights, vs.points[idx], 1.0 / lambda));
                    auto w_m = setup.na.chart.forward(
                        dilate_chart(weights, ws.points[idx], 1.0 / lambda));
                    auto scaled = rho_estimate(setup.rho_ctx, v_m, w_m, cfg.rho);
                    if (scaled.status != RhoStatus::Converged) return;
                    out[idx].value = std::abs(lambda * scaled.value - base.value);
                    out[idx].ok = true;
                } catch (const NumericFailure&) {
                }
            },
            cfg.exec);
        double worst = 0.0;
        int good = 0, bad = vs.failures + ws.failures;
        for (const auto& o : out) {
            if (o.ok) {
                worst = std::max(worst, o.value);
                ++good;
            } else {
                ++bad;
            }
        }
        rep.eps.push_back(lambda);
        rep.value.push_back(worst);
        rep.n_samples.push_back(good);
        rep.n_failures.push_back(bad);
    }
    fit_and_judge(rep, cfg.zero_floor);
    return rep;
}

ConvergenceReport gromov_convergence_experiment(const WeightedSystem& sys, const RatVec& u,
                                                const ExperimentConfig& cfg) {
    validate_grid(cfg);
    auto na = nilpotentize(sys, u, cfg.rho.flow);
    ConvergenceReport rep;
    rep.experiment = "gromov";
    rep.space = sys.name;
    rep.seed = cfg.seed;
    rep.expected_slope = 0.9;
    const auto& weights = na.coord_weights();
    const int n = sys.dim();

    for (size_t gi = 0; gi < cfg.eps_grid.size(); ++gi) {
        double eps = cfg.eps_grid[gi];
        std::vector<SampleOutcome> out(cfg.box_points);
        run_indexed(
            cfg.box_points,
            [&](size_t idx) {
                CounterRng rng(cfg.seed + 29, (gi + 1) * 104729ULL + idx);
                std::vector<double> x(n);
                for (int i = 0; i < n; ++i) x[i] = rng.symmetric();
                double worst = 0.0;
                try {
                    for (size_t wi = 0; wi < na.words().size(); ++wi) {
                        if (na.words()[wi].is_zero) continue;
                        auto xs = dilate_chart(weights, x, eps);
                        auto pf = na.chart.pushforward_at(na.words()[wi].field, xs);
                        auto hat = na.hat[wi].to_double().evaluate(x);
                        for (int j = 0; j < n; ++j) {
                            double rescaled = std::pow(eps, na.words()[wi].hdeg) *
                                              std::pow(eps, -weights[j]) * pf[j];
                            worst = std::max(worst, std::abs(rescaled - hat[j]));
                        }
                    }
                    out[idx].value = worst;
                    out[idx].ok = true;
                } catch (const NumericFailure&) {
                }
            },
            cfg.exec);
        double worst = 0.0;
        int good = 0, bad = 0;
        for (const auto& o : out) {
            if (o.ok) {
                worst = std::max(worst, o.value);
                ++good;
            } else {
                ++bad;
            }
        }
        rep.eps.push_back(eps);
        rep.value.push_back(worst);
        rep.n_samples.push_back(good);
        rep.n_failures.push_back(bad);
    }
    fit_and_judge(rep, cfg.zero_floor);
    return rep;
}

void fit_and_judge(ConvergenceReport& rep, double zero_floor) {
    double vmax = 0.0;
    for (double v : rep.value) vmax = std::max(vmax, v);
    if (vmax <= zero_floor) {
        rep.verdict = Verdict::PassZero;
        rep.note = "all measured values below the zero floor " + fmt_g17(zero_floor);
        rep.fit_valid = false;
        return;
    }
    std::vector<double> xs, ys;
    for (size_t i = 0; i < rep.eps.size(); ++i) {
        if (rep.value[i] > zero_floor && rep.n_samples[i] > 0) {
            xs.push_back(std::log(rep.eps[i]));
            ys.push_back(std::log(rep.value[i]));
        }
    }
    if (xs.size() < 4) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "fewer than 4 usable grid points";
        rep.fit_valid = false;
        return;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double m = static_cast<double>(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double denom = m * sxx - sx * sx;
    rep.slope = (m * sxy - sx * sy) / denom;
    rep.intercept = (sy - rep.slope * sx) / m;
    double ss_tot = syy - sy * sy / m;
    double ss_res = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double pred = rep.slope * xs[i] + rep.intercept;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
    }
    rep.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    rep.fit_valid = true;
    if (rep.r2 < 0.9) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "R^2 below 0.9";
        return;
    }
    bool ok = rep.slope_upper_bound ? (rep.slope <= rep.expected_slope)
                                    : (rep.slope >= rep.expected_slope);
    rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
}

std::string render_csv(const ConvergenceReport& rep) {
    if (rep.eps.empty()) throw UsageError("cannot render an empty report");
    std::ostringstream os;
    os << "epsilon,value,n_samples,n_failures,seed\n";
    for (size_t i = 0; i < rep.eps.size(); ++i)
        os << fmt_g17(rep.eps[i]) << "," << fmt_g17(rep.value[i]) << "," << rep.n_samples[i]
           << "," << rep.n_failures[i] << "," << rep.seed << "\n";
    return os.str();
}

std::string render_svg(const ConvergenceReport& rep) {
    if (rep.eps.empty()) throw UsageError("cannot render an empty report");
    const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
    auto fmt = [](double x) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.6g", x);
        return std::string(buf);
    };
    double floor_val = 1e-300;
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < rep.eps.size(); ++i)
        if (rep.value[i] > floor_val)
            pts.emplace_back(std::log10(rep.eps[i]), std::log10(rep.value[i]));
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    if (!pts.empty()) {
        x0 = x1 = pts[0].first;
        y0 = y1 = pts[0].second;
        for (auto& [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        if (x1 - x0 < 1e-9) x1 = x0 + 1;
        if (y1 - y0 < 1e-9) y1 = y0 + 1;
    }
    auto px = [&](double x) { return ML + (x - x0) / (x1 - x0) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
       << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << (W - ML - MR)
       << "\" height=\"" << (H - MT - MB)
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << rep.experiment << " / " << rep.space << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">log10(grid)</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2
       << ")\">log10(value)</text>\n";
    for (auto& [x, y] : pts)
        os << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
           << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
    if (rep.fit_valid && !pts.empty()) {
        double lx0 = x0, lx1 = x1;
        double ly0 = (rep.slope * lx0 * std::log(10.0) + rep.intercept) / std::log(10.0);
        double ly1 = (rep.slope * lx1 * std::log(10.0) + rep.intercept) / std::log(10.0);
        os << "<line x1=\"" << fmt(px(lx0)) << "\" y1=\"" << fmt(py(ly0)) << "\" x2=\""
           << fmt(px(lx1)) << "\" y2=\"" << fmt(py(ly1))
           << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << ML + 8 << "\" y=\"" << MT + 18 << "\" font-size=\"12\">slope "
           << fmt(rep.slope) << ", R2 " << fmt(rep.r2) << "</text>\n";
    } else {
        os << "<text x=\"" << ML + 8 << "\" y=\"" << MT + 18 << "\" font-size=\"12\">"
           << to_string(rep.verdict) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_report(const ConvergenceReport& rep, const std::string& csv_path,
                 const std::string& svg_path) {
    std::string csv = render_csv(rep);  // throws before any file is opened
    std::string svg = render_svg(rep);
    auto write_all = [](const std::string& path, const std::string& body) {
        std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw UsageError("cannot open '" + path + "' for writing");
        f << body;
        if (!f.good()) throw UsageError("write failed for '" + path + "'");
    };
    write_all(csv_path, csv);
    write_all(svg_path, svg);
}

}  // namespace ccw
