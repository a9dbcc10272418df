#include "ccw/grading.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ccw/errors.hpp"
#include "ccw/rng.hpp"

namespace ccw {

namespace {

RatMat rat_identity(int n) {
    RatMat m(n, RatVec(n, Rational(0)));
    for (int i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

RatMat rat_inverse(RatMat a) {
    const int n = static_cast<int>(a.size());
    RatMat inv = rat_identity(n);
    for (int c = 0; c < n; ++c) {
        int pivot = -1;
        for (int r = c; r < n; ++r)
            if (a[r][c] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) throw StructuralDefect("singular matrix in chart construction");
        std::swap(a[c], a[pivot]);
        std::swap(inv[c], inv[pivot]);
        Rational d = a[c][c];
        for (int k = 0; k < n; ++k) {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0) continue;
            Rational f = a[r][c];
            for (int k = 0; k < n; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& m) {
    Eigen::MatrixXd e(m.size(), m.empty() ? 0 : m[0].size());
    for (size_t r = 0; r < m.size(); ++r)
        for (size_t c = 0; c < m[r].size(); ++c) e(r, c) = m[r][c];
    return e;
}

}  // namespace

PrivilegedChart privileged_chart(const WeightedSystem& sys, const RatVec& u,
                                 const FlowConfig& cfg) {
    PrivilegedChart chart;
    chart.sys_ = sys;
    chart.flow_cfg_ = cfg;
    chart.frame_ = adapted_frame(sys, u);
    chart.weights_ = chart.frame_.frame_weights;
    const int n = sys.dim();

    // symbolic composition: rightmost frame factor flows first
    bool exact = true;
    std::vector<std::optional<std::vector<RPoly>>> step_maps;
    step_maps.reserve(n);
    for (const auto& w : chart.frame_.words) {
        auto m = symbolic_time_flow(w.field, cfg.series_cap);
        if (!m) exact = false;
        step_maps.push_back(std::move(m));
    }
    chart.exact_ = exact;
    if (exact) {
        std::vector<RPoly> current;
        current.reserve(n);
        for (int j = 0; j < n; ++j) current.push_back(RPoly::constant(n, u[j]));
        for (int k = n - 1; k >= 0; --k) {
            std::vector<RPoly> subs = current;
            subs.push_back(RPoly::variable(n, k));  // time symbol = x_k
            std::vector<RPoly> next;
            next.reserve(n);
            for (int j = 0; j < n; ++j) next.push_back((*step_maps[k])[j].compose(subs));
            current = std::move(next);
        }
        chart.forward_ = current;
        chart.jac_.resize(n);
        for (int i = 0; i < n; ++i) {
            chart.jac_[i].reserve(n);
            for (int j = 0; j < n; ++j) chart.jac_[i].push_back(chart.forward_[i].derivative(j));
        }
        // invariants: Phi(0) = u, DPhi(0) e_i = Y_i(u)
        RatVec zero(n, Rational(0));
        for (int j = 0; j < n; ++j)
            if (chart.forward_[j].evaluate<Rational>(zero) != u[j])
                throw StructuralDefect("privileged chart does not send 0 to the base point");
        for (int i = 0; i < n; ++i) {
            RatVec yi = chart.frame_.words[i].field.evaluate<Rational>(u);
            for (int j = 0; j < n; ++j)
                if (chart.jac_[j][i].evaluate<Rational>(zero) != yi[j])
                    throw StructuralDefect("chart Jacobian at 0 does not reproduce the frame");
        }
    }
    return chart;
}

std::vector<double> PrivilegedChart::forward(const std::vector<double>& x) const {
    const int n = dim();
    if (static_cast<int>(x.size()) != n) throw UsageError("chart point dimension mismatch");
    if (exact_) {
        std::vector<double> p(n);
        for (int j = 0; j < n; ++j) p[j] = forward_[j].evaluate<double>(x);
        return p;
    }
    std::vector<std::pair<double, DField>> steps;
    steps.reserve(n);
    for (int i = 0; i < n; ++i) steps.emplace_back(x[i], frame_.words[i].field.to_double());
    return exp_product(steps, sys_.anchor_d(), flow_cfg_).endpoint;
}

std::vector<std::vector<double>> PrivilegedChart::jacobian_at(const std::vector<double>& x) const {
    const int n = dim();
    std::vector<std::vector<double>> J(n, std::vector<double>(n));
    if (exact_) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) J[i][j] = jac_[i][j].evaluate<double>(x);
        return J;
    }
    const double h = 1e-6;
    for (int j = 0; j < n; ++j) {
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        auto fp = forward(xp), fm = forward(xm);
        for (int i = 0; i < n; ++i) J[i][j] = (fp[i] - fm[i]) / (2 * h);
    }
    return J;
}

std::vector<double> PrivilegedChart::inverse(const std::vector<double>& p, double tol) const {
    const int n = dim();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    // linear initial guess through the frame values at the base point
    {
        auto J0 = to_eigen(jacobian_at(std::vector<double>(n, 0.0)));
        Eigen::VectorXd rhs(n);
        auto u = sys_.anchor_d();
        for (int i = 0; i < n; ++i) rhs(i) = p[i] - u[i];
        x = J0.fullPivLu().solve(rhs);
    }
    for (int iter = 0; iter < 80; ++iter) {
        std::vector<double> xv(x.data(), x.data() + n);
        auto fx = forward(xv);
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i) r(i) = fx[i] - p[i];
        if (r.lpNorm<Eigen::Infinity>() <= tol) return xv;
        auto J = to_eigen(jacobian_at(xv));
        Eigen::VectorXd step = J.fullPivLu().solve(r);
        x -= step;
        if (x.lpNorm<Eigen::Infinity>() > 4.0 * working_halfwidth_ + 1.0)
            throw NumericFailure("chart inversion diverged outside the working box");
    }
    throw NumericFailure("chart inversion did not converge");
}

std::vector<double> PrivilegedChart::pushforward_at(const RField& X,
                                                    const std::vector<double>& x) const {
    auto J = to_eigen(jacobian_at(x));
    auto p = forward(x);
    auto v = X.to_double().evaluate(p);
    Eigen::VectorXd rhs(v.size());
    for (size_t i = 0; i < v.size(); ++i) rhs(i) = v[i];
    Eigen::VectorXd sol = J.fullPivLu().solve(rhs);
    return std::vector<double>(sol.data(), sol.data() + sol.size());
}

std::vector<double> dilate_chart(const std::vector<int>& weights,
                                 const std::vector<double>& x, double eps) {
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] * std::pow(eps, weights[i]);
    return y;
}

std::vector<double> dilate(const PrivilegedChart& chart, double eps,
                           const std::vector<double>& p) {
    if (!(eps > 0)) throw UsageError("dilation parameter must be positive");
    auto x = chart.inverse(p);
    for (double v : x)
        if (std::abs(v) > chart.working_halfwidth() * 1.5)
            throw NumericFailure("dilation argument outside the working box");
    return chart.forward(dilate_chart(chart.coordinate_weights(), x, eps));
}

PushforwardSystem pushforward_system(const WeightedSystem& sys,
                                     const PrivilegedChart& chart) {
    PushforwardSystem out;
    out.words = enumerate_commutators(sys);
    out.truncation_degree = sys.depth;
    const int n = sys.dim();
    const int M = sys.depth;

    if (chart.exact()) {
        RatVec zero(n, Rational(0));
        RatMat A0(n, RatVec(n, Rational(0)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A0[i][j] = chart.forward_polys()[i].derivative(j).evaluate<Rational>(zero);
        RatMat A0inv = rat_inverse(A0);
        // Q(x) = A0^{-1} (DPhi - A0), entries with no constant term
        std::vector<std::vector<RPoly>> Q(n, std::vector<RPoly>(n, RPoly(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                RPoly acc(n);
                for (int k = 0; k < n; ++k) {
                    RPoly e = chart.forward_polys()[k].derivative(j);
                    e.add_term(Mono(n, 0), -A0[k][j]);
                    if (!e.is_zero()) acc += e.scaled(A0inv[i][k]);
                }
                Q[i][j] = acc.truncate_total_degree(M);
            }
        for (const auto& w : out.words) {
            // b(x) = X_I(Phi(x)) truncated
            std::vector<RPoly> b(n, RPoly(n));
            for (int j = 0; j < n; ++j)
                b[j] = w.field.component(j).compose(chart.forward_polys()).truncate_total_degree(M);
            std::vector<RPoly> v(n, RPoly(n));
            for (int i = 0; i < n; ++i) {
                RPoly acc(n);
                for (int k = 0; k < n; ++k)
                    if (!b[k].is_zero()) acc += b[k].scaled(A0inv[i][k]);
                v[i] = acc;
            }
            std::vector<RPoly> acc = v, term = v;
            for (int step = 1; step <= M; ++step) {
                std::vector<RPoly> next(n, RPoly(n));
                bool nonzero = false;
                for (int i = 0; i < n; ++i) {
                    RPoly s(n);
                    for (int k = 0; k < n; ++k)
                        if (!Q[i][k].is_zero() && !term[k].is_zero()) s += Q[i][k] * term[k];
                    next[i] = (-s).truncate_total_degree(M);
                    if (!next[i].is_zero()) nonzero = true;
                }
                term = std::move(next);
                for (int i = 0; i < n; ++i) acc[i] += term[i];
                if (!nonzero) break;
            }
            out.pushed.emplace_back(chart.system().chart, std::move(acc));
        }
    } else {
        // finite-difference Taylor fit on shrinking boxes with a Richardson
        // style residual estimate
        const double h1 = 0.05, h2 = 0.025;
        std::vector<Mono> monos;
        {
            // all exponent vectors with total degree <= M
            std::function<void(Mono&, int, int)> rec = [&](Mono& m, int var, int left) {
                if (var == n) {
                    monos.push_back(m);
                    return;
                }
                for (int e = 0; e <= left; ++e) {
                    m[var] = e;
                    rec(m, var + 1, left - e);
                }
                m[var] = 0;
            };
            Mono m(n, 0);
            rec(m, 0, M);
        }
        auto fit = [&](const RField& X, double h) {
            const int samples = 3 * static_cast<int>(monos.size()) + 10;
            CounterRng rng(2024, 5);
            Eigen::MatrixXd A(samples * n, monos.size() * n);
            A.setZero();
            Eigen::VectorXd rhs(samples * n);
            for (int s = 0; s < samples; ++s) {
                std::vector<double> x(n);
                for (int i = 0; i < n; ++i) x[i] = h * rng.symmetric();
                auto val = chart.pushforward_at(X, x);
                for (int comp = 0; comp < n; ++comp) {
                    rhs(s * n + comp) = val[comp];
                    for (size_t mi = 0; mi < monos.size(); ++mi) {
                        double mv = 1.0;
                        for (int i = 0; i < n; ++i)
                            for (int e = 0; e < monos[mi][i]; ++e) mv *= x[i];
                        A(s * n + comp, comp * monos.size() + mi) = mv;
                    }
                }
            }
            Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
            return sol;
        };
        for (const auto& w : out.words) {
            Eigen::VectorXd c1 = fit(w.field, h1);
            Eigen::VectorXd c2 = fit(w.field, h2);
            double resid = (c1 - c2).lpNorm<Eigen::Infinity>();
            if (resid > 1e-5)
                throw NumericFailure("pushforward Taylor fit did not stabilize for word " +
                                     word_to_string(w.word));
            std::vector<RPoly> comps(n, RPoly(n));
            for (int comp = 0; comp < n; ++comp)
                for (size_t mi = 0; mi < monos.size(); ++mi) {
                    double cv = c2(comp * monos.size() + mi);
                    if (std::abs(cv) > 1e-9) comps[comp].add_term(monos[mi], Rational(cv));
                }
            out.pushed.emplace_back(chart.system().chart, std::move(comps));
            out.residuals.push_back(resid);
        }
    }

    if (out.residuals.empty()) {
        // numeric residual bound on a small box (the dropped o(||x||^M) tail)
        CounterRng rng(7, 11);
        for (size_t wi = 0; wi < out.words.size(); ++wi) {
            double worst = 0.0;
            for (int s = 0; s < 8; ++s) {
                std::vector<double> x(n);
                for (int i = 0; i < n; ++i) x[i] = 0.05 * rng.symmetric();
                auto exact_v = chart.pushforward_at(out.words[wi].field, x);
                auto poly_v = out.pushed[wi].to_double().evaluate(x);
                for (int i = 0; i < n; ++i)
                    worst = std::max(worst, std::abs(exact_v[i] - poly_v[i]));
            }
            out.residuals.push_back(worst);
        }
    }
    return out;
}

NilpotentApproximation nilpotentize(const WeightedSystem& sys, const RatVec& u,
                                    const FlowConfig& cfg) {
    NilpotentApproximation na;
    na.chart = privileged_chart(sys, u, cfg);
    na.pushforward = pushforward_system(sys, na.chart);
    const auto& weights = na.chart.coordinate_weights();
    const int M = sys.depth;

    for (size_t i = 0; i < na.words().size(); ++i)
        na.hat.push_back(graded_part(na.pushforward.pushed[i], weights,
                                     -static_cast<long>(na.words()[i].hdeg)));

    // locate the frame words and their hat fields
    for (const auto& fw : na.chart.frame().words) {
        int pos = -1;
        for (size_t i = 0; i < na.words().size(); ++i)
            if (na.words()[i].word == fw.word) {
                pos = static_cast<int>(i);
                break;
            }
        if (pos < 0) throw StructuralDefect("frame word missing from enumeration");
        na.frame_word_pos.push_back(pos);
        na.hat_frame.push_back(na.hat[pos]);
    }

    if (!na.chart.exact()) return na;  // numeric path: tolerance checks live in tests

    // exact verification of the graded-algebra invariants
    const int n = sys.dim();
    RatVec zero(n, Rational(0));
    for (size_t i = 0; i < na.hat.size(); ++i)
        if (!is_homogeneous_of_order(na.hat[i], weights, -static_cast<long>(na.words()[i].hdeg)))
            throw StructuralDefect("hat field is not homogeneous of its expected order");
    for (size_t i = 0; i < na.hat.size(); ++i)
        for (size_t j = 0; j < na.hat.size(); ++j) {
            long s = na.words()[i].hdeg + na.words()[j].hdeg;
            RField br = lie_bracket(na.hat[i], na.hat[j]);
            if (s > M) {
                if (!br.is_zero())
                    throw StructuralDefect("graded bracket does not vanish above the depth");
            } else if (!is_homogeneous_of_order(br, weights, -s)) {
                throw StructuralDefect("graded bracket closure fails");
            }
        }
    // anchor agreement: frame hat fields reproduce the frame at 0 and the
    // level spans at the anchor coincide
    for (size_t i = 0; i < na.hat_frame.size(); ++i) {
        RatVec hv = na.hat_frame[i].evaluate<Rational>(zero);
        RatVec pv = na.pushforward.pushed[na.frame_word_pos[i]].evaluate<Rational>(zero);
        if (hv != pv)
            throw StructuralDefect("hat frame value at the anchor differs from the frame");
    }
    for (int l = 1; l <= M; ++l) {
        RatMat hat_rows, orig_rows, both;
        for (size_t i = 0; i < na.hat.size(); ++i) {
            if (na.words()[i].hdeg > l) continue;
            auto hv = na.hat[i].evaluate<Rational>(zero);
            auto ov = na.pushforward.pushed[i].evaluate<Rational>(zero);
            hat_rows.push_back(hv);
            orig_rows.push_back(ov);
            both.push_back(hv);
            both.push_back(ov);
        }
        int rh = rat_rank(hat_rows), ro = rat_rank(orig_rows), rb = rat_rank(both);
        if (rh != ro || rb != ro)
            throw StructuralDefect("anchor filtration spans of hat and original fields differ at level " +
                                   std::to_string(l));
    }
    return na;
}

StructureConstants structure_constants(const NilpotentApproximation& na) {
    StructureConstants sc;
    const int n = na.dim();
    sc.n = n;
    sc.degrees = na.coord_weights();
    const int M = na.depth();

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            RField br = lie_bracket(na.hat_frame[i], na.hat_frame[j]);
            int target = sc.degrees[i] + sc.degrees[j];
            if (br.is_zero()) continue;
            if (target > M)
                throw StructuralDefect("nonzero hat bracket above the depth");
            // candidates: frame entries of matching degree
            std::vector<int> cand;
            for (int k = 0; k < n; ++k)
                if (sc.degrees[k] == target) cand.push_back(k);
            // linear identification over the monomial coefficient space
            std::map<std::pair<int, Mono>, int> rows;
            auto row_of = [&](int comp, const Mono& m) {
                auto key = std::make_pair(comp, m);
                auto it = rows.find(key);
                if (it == rows.end()) it = rows.emplace(key, static_cast<int>(rows.size())).first;
                return it->second;
            };
            for (int comp = 0; comp < n; ++comp) {
                for (const auto& [m, c] : br.component(comp).terms()) row_of(comp, m);
                for (int k : cand)
                    for (const auto& [m, c] : na.hat_frame[k].component(comp).terms())
                        row_of(comp, m);
            }
            RatMat A(rows.size(), RatVec(cand.size(), Rational(0)));
            RatVec b(rows.size(), Rational(0));
            for (int comp = 0; comp < n; ++comp)
                for (const auto& [m, c] : br.component(comp).terms())
                    b[row_of(comp, m)] = c;
            for (size_t ci = 0; ci < cand.size(); ++ci)
                for (int comp = 0; comp < n; ++comp)
                    for (const auto& [m, c] : na.hat_frame[cand[ci]].component(comp).terms())
                        A[row_of(comp, m)][ci] = c;
            auto sol = rat_solve(A, b);
            if (!sol)
                throw StructuralDefect("frame bracket [" + word_to_string(na.words()[na.frame_word_pos[i]].word) +
                                       ", " + word_to_string(na.words()[na.frame_word_pos[j]].word) +
                                       "] is not a constant combination of the hat frame");
            for (size_t ci = 0; ci < cand.size(); ++ci) {
                sc.set(i, j, cand[ci], (*sol)[ci]);
                sc.set(j, i, cand[ci], -(*sol)[ci]);
            }
        }

    if (auto bad = sc.jacobi_violation())
        throw StructuralDefect("structure constants violate the Jacobi identity at triple (" +
                               std::to_string(std::get<0>(*bad)) + "," +
                               std::to_string(std::get<1>(*bad)) + "," +
                               std::to_string(std::get<2>(*bad)) + ")");
    return sc;
}

std::optional<std::tuple<int, int, int>> StructureConstants::jacobi_violation() const {
    auto unit = [&](int i) {
        std::vector<Rational> v(n, Rational(0));
        v[i] = 1;
        return v;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                auto r1 = bracket(unit(i), bracket(unit(j), unit(k)));
                auto r2 = bracket(unit(j), bracket(unit(k), unit(i)));
                auto r3 = bracket(unit(k), bracket(unit(i), unit(j)));
                for (int m = 0; m < n; ++m)
                    if (r1[m] + r2[m] + r3[m] != 0) return std::make_tuple(i, j, k);
            }
    return std::nullopt;
}

namespace {
Rational factorial_rat(int k) {
    Rational f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

void gen_bch_blocks(int max_letters, int used, std::vector<std::pair<int, int>>& blocks,
                    std::vector<BchTerm>& out) {
    if (!blocks.empty()) {
        int total = used;
        Rational coeff = ((blocks.size() % 2) ? Rational(1) : Rational(-1)) /
                         Rational(static_cast<int>(blocks.size()));
        coeff /= total;
        for (const auto& [r, s] : blocks) coeff /= factorial_rat(r) * factorial_rat(s);
        BchTerm term;
        term.coeff = coeff;
        for (const auto& [r, s] : blocks) {
            for (int i = 0; i < r; ++i) term.letters.push_back(0);
            for (int i = 0; i < s; ++i) term.letters.push_back(1);
        }
        out.push_back(std::move(term));
    }
    if (used >= max_letters) return;
    for (int r = 0; r + used <= max_letters; ++r)
        for (int s = (r == 0 ? 1 : 0); r + s + used <= max_letters; ++s) {
            if (r + s == 0) continue;
            blocks.emplace_back(r, s);
            gen_bch_blocks(max_letters, used + r + s, blocks, out);
            blocks.pop_back();
        }
}
}  // namespace

const std::vector<BchTerm>& bch_terms(int max_letters) {
    static std::map<int, std::vector<BchTerm>> cache;
    auto it = cache.find(max_letters);
    if (it != cache.end()) return it->second;
    std::vector<BchTerm> terms;
    std::vector<std::pair<int, int>> blocks;
    gen_bch_blocks(max_letters, 0, blocks, terms);
    return cache.emplace(max_letters, std::move(terms)).first->second;
}

}  // namespace ccw
