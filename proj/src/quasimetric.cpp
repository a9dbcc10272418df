#include "ccw/quasimetric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "ccw/errors.hpp"
#include "ccw/rng.hpp"

namespace ccw {

std::string to_string(RhoStatus s) {
    switch (s) {
        case RhoStatus::Converged: return "Converged";
        case RhoStatus::Stalled: return "Stalled";
        default: return "Infeasible";
    }
}

namespace {

// sign-proportionality class: g == r * f for some rational r != 0
bool proportional(const RField& f, const RField& g) {
    Rational ratio = 0;
    for (int j = 0; j < f.dim(); ++j) {
        const auto& ft = f.component(j).terms();
        const auto& gt = g.component(j).terms();
        if (ft.size() != gt.size()) return false;
        auto it = ft.begin();
        auto jt = gt.begin();
        for (; it != ft.end(); ++it, ++jt) {
            if (it->first != jt->first) return false;
            if (ratio == 0) ratio = jt->second / it->second;
            if (jt->second != ratio * it->second) return false;
        }
    }
    return ratio != 0;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

MetricContext MetricContext::for_fields(const Chart& chart, std::vector<Word> words,
                                        std::vector<int> hdegs, std::vector<RField> fields,
                                        const RatVec& base, int depth,
                                        const FlowConfig& cfg) {
    MetricContext ctx;
    ctx.flow_cfg_ = cfg;
    ctx.depth_ = depth;
    // drop zero fields, collapse sign-proportional duplicates onto the first
    // representative
    for (size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].is_zero()) continue;
        bool dup = false;
        for (const auto& kept : ctx.fields_)
            if (proportional(kept, fields[i])) {
                dup = true;
                break;
            }
        if (dup) continue;
        ctx.fields_.push_back(fields[i]);
        ctx.words_.push_back(words[i]);
        ctx.hdegs_.push_back(hdegs[i]);
    }
    if (ctx.fields_.empty()) throw StructuralDefect("no nonzero control fields");
    for (const auto& f : ctx.fields_) ctx.dfields_.push_back(f.to_double());
    ctx.base_.clear();
    for (const auto& r : base) ctx.base_.push_back(to_double(r));

    // greedy frame among the context controls at the base point (for inits)
    RatMat rows;
    for (const auto& f : ctx.fields_) rows.push_back(f.evaluate<Rational>(base));
    ctx.frame_controls_ = rat_greedy_independent(rows);
    if (static_cast<int>(ctx.frame_controls_.size()) != chart.dim())
        throw StructuralDefect("control fields do not span the tangent space at the base point");
    ctx.symbolic_ = SymbolicEndpoint::build(ctx.fields_, cfg.series_cap);
    return ctx;
}

MetricContext MetricContext::for_system(const WeightedSystem& sys, const FlowConfig& cfg) {
    auto words = enumerate_commutators(sys);
    std::vector<Word> ws;
    std::vector<int> hd;
    std::vector<RField> fs;
    for (auto& w : words) {
        ws.push_back(w.word);
        hd.push_back(w.hdeg);
        fs.push_back(w.field);
    }
    return for_fields(sys.chart, std::move(ws), std::move(hd), std::move(fs), sys.anchor,
                      sys.depth, cfg);
}

MetricContext MetricContext::for_approximation(const NilpotentApproximation& na,
                                               const FlowConfig& cfg) {
    std::vector<Word> ws;
    std::vector<int> hd;
    std::vector<RField> fs;
    for (size_t i = 0; i < na.words().size(); ++i) {
        ws.push_back(na.words()[i].word);
        hd.push_back(na.words()[i].hdeg);
        fs.push_back(na.hat[i]);
    }
    RatVec zero(na.dim(), Rational(0));
    return for_fields(na.chart.system().chart, std::move(ws), std::move(hd), std::move(fs),
                      zero, na.depth(), cfg);
}

std::vector<double> MetricContext::endpoint(const std::vector<double>& p,
                                            const std::vector<double>& controls) const {
    if (symbolic_) return symbolic_->evaluate(p, controls);
    return exp_combination(controls, dfields_, p, flow_cfg_).endpoint;
}

std::vector<std::vector<double>> MetricContext::control_jacobian(
    const std::vector<double>& p, const std::vector<double>& controls) const {
    if (symbolic_) return symbolic_->control_jacobian(p, controls);
    // forward differences through the flow
    const int n = static_cast<int>(p.size());
    const int k = control_dim();
    auto base_ep = endpoint(p, controls);
    std::vector<std::vector<double>> J(n, std::vector<double>(k));
    for (int c = 0; c < k; ++c) {
        auto bumped = controls;
        double h = 1e-7 * (1.0 + std::abs(controls[c]));
        bumped[c] += h;
        auto ep = endpoint(p, bumped);
        for (int i = 0; i < n; ++i) J[i][c] = (ep[i] - base_ep[i]) / h;
    }
    return J;
}

std::vector<double> MetricContext::endpoint_numeric(const std::vector<double>& p,
                                                    const std::vector<double>& controls) const {
    FlowConfig cfg = flow_cfg_;
    cfg.allow_exact_series = false;
    return exp_combination(controls, dfields_, p, cfg).endpoint;
}

namespace {

struct InnerResult {
    std::vector<double> controls;  // unscaled w_I
    double residual = 1e300;
    bool feasible = false;
};

// projected Levenberg-style least squares on the endpoint map over scaled
// controls |s_I| <= 1 (box inactive when boxed = false)
InnerResult solve_scaled(const MetricContext& ctx, const std::vector<double>& v,
                         const std::vector<double>& target, const std::vector<double>& scale,
                         std::vector<double> s, bool boxed, const RhoConfig& cfg) {
    const int n = static_cast<int>(v.size());
    const int k = ctx.control_dim();
    auto clip = [&](std::vector<double>& x) {
        if (!boxed) return;
        for (auto& val : x) val = std::clamp(val, -1.0, 1.0);
    };
    clip(s);
    auto controls_of = [&](const std::vector<double>& sv) {
        std::vector<double> c(k);
        for (int i = 0; i < k; ++i) c[i] = sv[i] * scale[i];
        return c;
    };
    auto resid_of = [&](const std::vector<double>& sv) {
        auto ep = ctx.endpoint(v, controls_of(sv));
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r(i) = ep[i] - target[i];
        return r;
    };
    Eigen::VectorXd r = resid_of(s);
    double best = r.norm();
    double lambda = 1e-4;
    for (int iter = 0; iter < cfg.max_iter && best > cfg.endpoint_tol * 0.5; ++iter) {
        auto Jc = ctx.control_jacobian(v, controls_of(s));
        Eigen::MatrixXd J(n, k);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c) J(i, c) = Jc[i][c] * scale[c];
        Eigen::MatrixXd H = J.transpose() * J;
        Eigen::VectorXd g = J.transpose() * r;
        bool improved = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd Hl = H;
            for (int i = 0; i < k; ++i) Hl(i, i) += lambda * (H(i, i) + 1e-12);
            Eigen::VectorXd d = Hl.ldlt().solve(-g);
            std::vector<double> cand(s);
            for (int i = 0; i < k; ++i) cand[i] += d(i);
            clip(cand);
            Eigen::VectorXd rc = resid_of(cand);
            if (rc.norm() < best) {
                s = std::move(cand);
                r = rc;
                best = rc.norm();
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!improved) break;
    }
    InnerResult res;
    res.controls = controls_of(s);
    res.residual = best;
    res.feasible = best <= cfg.endpoint_tol;
    return res;
}

}  // namespace

QuasimetricEstimate rho_estimate(const MetricContext& ctx, const std::vector<double>& v,
                                 const std::vector<double>& w, const RhoConfig& cfg) {
    const int k = ctx.control_dim();
    QuasimetricEstimate est;
    est.controls.assign(k, 0.0);
    if (max_abs_diff(v, w) == 0.0) {
        est.status = RhoStatus::Converged;
        return est;
    }

    std::vector<double> unit_scale(k, 1.0);
    CounterRng rng(cfg.seed, 23);

    // stage A: frame-control square solve for an initial witness
    std::vector<double> start(k, 0.0);
    {
        // restrict the Jacobian to frame controls by zeroing the others via
        // scale: frame controls scale 1, others 0 (their s stays 0)
        std::vector<double> frame_scale(k, 0.0);
        for (int i : ctx.frame_controls()) frame_scale[i] = 1.0;
        auto r0 = solve_scaled(ctx, v, w, frame_scale, start, false, cfg);
        if (r0.feasible) start = r0.controls;  // w_I values (scale 1 on frame)
    }
    // stage B: full unconstrained polish / multistart
    InnerResult init;
    {
        RhoConfig open = cfg;
        open.max_iter = std::max(cfg.max_iter, 160);
        init = solve_scaled(ctx, v, w, unit_scale, start, false, open);
        for (int attempt = 0; attempt < cfg.multistart && !init.feasible; ++attempt) {
            std::vector<double> s0(k);
            double spread = max_abs_diff(v, w) + 1.0;
            for (int i = 0; i < k; ++i) s0[i] = spread * rng.symmetric();
            auto r = solve_scaled(ctx, v, w, unit_scale, s0, false, open);
            if (r.residual < init.residual) init = r;
        }
    }
    if (!init.feasible) {
        est.status = init.residual > 1000.0 * cfg.endpoint_tol ? RhoStatus::Infeasible
                                                               : RhoStatus::Stalled;
        est.endpoint_residual = init.residual;
        return est;
    }

    auto delta_of = [&](const std::vector<double>& controls) {
        double d = 0.0;
        for (int i = 0; i < k; ++i)
            d = std::max(d, std::pow(std::abs(controls[i]), 1.0 / ctx.hdegs()[i]));
        return d;
    };

    double hi = delta_of(init.controls);
    std::vector<double> witness = init.controls;
    double witness_residual = init.residual;
    if (hi == 0.0) {
        est.status = RhoStatus::Converged;
        est.endpoint_residual = init.residual;
        return est;
    }
    double lo = hi * 1e-9;
    auto scaled_start = [&](const std::vector<double>& controls, double delta) {
        std::vector<double> s(k);
        for (int i = 0; i < k; ++i)
            s[i] = std::clamp(controls[i] / std::pow(delta, ctx.hdegs()[i]), -1.0, 1.0);
        return s;
    };
    while (hi - lo > cfg.bisect_rel_gap * hi) {
        double mid = std::sqrt(hi * lo);
        std::vector<double> scale(k);
        for (int i = 0; i < k; ++i) scale[i] = std::pow(mid, ctx.hdegs()[i]);
        InnerResult best;
        auto try_start = [&](std::vector<double> s0) {
            auto r = solve_scaled(ctx, v, w, scale, std::move(s0), true, cfg);
            if (r.residual < best.residual) best = r;
        };
        try_start(scaled_start(witness, mid));
        if (!best.feasible) try_start(std::vector<double>(k, 0.0));
        for (int m = 0; m < cfg.multistart - 2 && !best.feasible; ++m) {
            std::vector<double> s0(k);
            for (int i = 0; i < k; ++i) s0[i] = rng.symmetric();
            try_start(std::move(s0));
        }
        if (best.feasible) {
            witness = best.controls;
            witness_residual = best.residual;
            hi = std::min(mid, delta_of(best.controls));
        } else {
            lo = mid;
        }
    }

    est.value = hi;
    est.controls = witness;
    est.status = RhoStatus::Converged;
    est.bisect_gap = (hi - lo) / hi;
    // independent certificate recheck through the numeric integrator
    auto check = ctx.endpoint_numeric(v, witness);
    est.endpoint_residual = std::max(witness_residual, max_abs_diff(check, w));
    return est;
}

QuasimetricEstimate rho_estimate(const WeightedSystem& sys, const std::vector<double>& v,
                                 const std::vector<double>& w, const RhoConfig& cfg) {
    auto ctx = MetricContext::for_system(sys, cfg.flow);
    return rho_estimate(ctx, v, w, cfg);
}

QuasimetricEstimate rho_u_estimate(const NilpotentApproximation& na,
                                   const std::vector<double>& v,
                                   const std::vector<double>& w, const RhoConfig& cfg) {
    auto ctx = MetricContext::for_approximation(na, cfg.flow);
    return rho_estimate(ctx, na.chart.inverse(v), na.chart.inverse(w), cfg);
}

BallSample ball_sample(const MetricContext& ctx, const std::vector<double>& center,
                       double r, int n, uint64_t seed, const FlowConfig& cfg) {
    if (!(r > 0)) throw UsageError("ball radius must be positive");
    (void)cfg;
    BallSample out;
    CounterRng rng(seed, 31);
    const int k = ctx.control_dim();
    for (int i = 0; i < n; ++i) {
        std::vector<double> controls(k);
        for (int c = 0; c < k; ++c)
            controls[c] = std::pow(r, ctx.hdegs()[c]) * rng.symmetric();
        try {
            out.points.push_back(ctx.endpoint(center, controls));
            out.controls.push_back(std::move(controls));
        } catch (const NumericFailure&) {
            ++out.failures;
        }
    }
    return out;
}

QuasimetricDiagnostics triangle_constant(const MetricContext& ctx,
                                         const std::vector<double>& center, int samples,
                                         double scale, uint64_t seed, const RhoConfig& cfg) {
    QuasimetricDiagnostics diag;
    auto us = ball_sample(ctx, center, scale, samples, seed);
    for (int i = 0; i < static_cast<int>(us.points.size()); ++i) {
        const auto& u = us.points[i];
        auto vw = ball_sample(ctx, u, scale, 2, seed + 1000 + i);
        if (vw.points.size() < 2) {
            ++diag.failures;
            continue;
        }
        const auto& v = vw.points[0];
        const auto& w = vw.points[1];
        try {
            auto rvw = rho_estimate(ctx, v, w, cfg);
            auto rwv = rho_estimate(ctx, w, v, cfg);
            auto ruv = rho_estimate(ctx, u, v, cfg);
            auto ruw = rho_estimate(ctx, u, w, cfg);
            if (rvw.status != RhoStatus::Converged || rwv.status != RhoStatus::Converged ||
                ruv.status != RhoStatus::Converged || ruw.status != RhoStatus::Converged) {
                ++diag.failures;
                continue;
            }
            diag.symmetry_defect = std::max(diag.symmetry_defect,
                                            std::abs(rvw.value - rwv.value));
            double denom = ruv.value + ruw.value;
            if (denom > 100.0 * cfg.endpoint_tol)
                diag.triangle_q = std::max(diag.triangle_q, rvw.value / denom);
            ++diag.samples_used;
        } catch (const NumericFailure&) {
            ++diag.failures;
        }
    }
    return diag;
}

QuasimetricDiagnostics cone_check(const NilpotentApproximation& na, int pairs,
                                  const std::vector<double>& eps_list, uint64_t seed,
                                  const RhoConfig& cfg) {
    auto ctx = MetricContext::for_approximation(na, cfg.flow);
    QuasimetricDiagnostics diag;
    const auto& weights = na.coord_weights();
    std::vector<double> origin(na.dim(), 0.0);
    auto vs = ball_sample(ctx, origin, 0.5, pairs, seed);
    auto ws = ball_sample(ctx, origin, 0.5, pairs, seed + 7);
    const int count = static_cast<int>(std::min(vs.points.size(), ws.points.size()));
    for (int i = 0; i < count; ++i) {
        try {
            auto base = rho_estimate(ctx, vs.points[i], ws.points[i], cfg);
            if (base.status != RhoStatus::Converged || base.value <= 100 * cfg.endpoint_tol) {
                ++diag.failures;
                continue;
            }
            for (double eps : eps_list) {
                auto dv = dilate_chart(weights, vs.points[i], eps);
                auto dw = dilate_chart(weights, ws.points[i], eps);
                auto scaled = rho_estimate(ctx, dv, dw, cfg);
                if (scaled.status != RhoStatus::Converged) {
                    ++diag.failures;
                    continue;
                }
                double defect = std::abs(scaled.value - eps * base.value) / (eps * base.value);
                diag.cone_defect = std::max(diag.cone_defect, defect);
                ++diag.samples_used;
            }
        } catch (const NumericFailure&) {
            ++diag.failures;
        }
    }
    return diag;
}

BoxInclusionReport box_inclusion_check(const MetricContext& ctx,
                                       const std::vector<double>& v, double r, double xi,
                                       int n, uint64_t seed, const RhoConfig& cfg) {
    BoxInclusionReport rep;
    rep.r = r;
    rep.xi = xi;
    auto xs = ball_sample(ctx, v, r, n, seed);
    for (int i = 0; i < static_cast<int>(xs.points.size()); ++i) {
        std::vector<std::vector<double>> targets;
        if (xi > 0) {
            auto ys = ball_sample(ctx, xs.points[i], xi, n, seed + 100 + i);
            targets = ys.points;
            rep.failures += ys.failures;
        } else {
            targets.push_back(xs.points[i]);
        }
        for (const auto& y : targets) {
            try {
                auto est = rho_estimate(ctx, v, y, cfg);
                if (est.status != RhoStatus::Converged) {
                    ++rep.failures;
                    continue;
                }
                rep.required_radius = std::max(rep.required_radius, est.value);
                ++rep.samples;
            } catch (const NumericFailure&) {
                ++rep.failures;
            }
        }
    }
    return rep;
}

}  // namespace ccw
