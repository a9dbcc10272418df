#include "ccw/flows.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>

#include "ccw/errors.hpp"

namespace ccw {

namespace {

using State = std::vector<double>;

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

FlowResult exact_series_flow(const std::vector<std::vector<DPoly>>& terms,
                             const std::vector<double>& p, double time) {
    const int n = static_cast<int>(terms.front().size());
    FlowResult res;
    res.method = FlowMethod::ExactSeries;
    res.estimated_error = 0.0;
    res.endpoint.assign(n, 0.0);
    double tk = 1.0;
    for (size_t k = 0; k < terms.size(); ++k) {
        double scale = tk / factorial(static_cast<int>(k));
        for (int j = 0; j < n; ++j)
            res.endpoint[j] += scale * terms[k][j].evaluate<double>(p);
        tk *= time;
    }
    return res;
}

FlowResult numeric_flow(const DField& X, const std::vector<double>& p, double time,
                        const FlowConfig& cfg) {
    State x = p;
    auto rhs = [&X](const State& s, State& dxdt, double) { dxdt = X.evaluate(s); };
    auto guard = [&](const State& s, double) {
        for (size_t i = 0; i < s.size(); ++i) {
            if (!std::isfinite(s[i]))
                throw NumericFailure("flow diverged (non-finite state)");
            if (std::abs(s[i] - p[i]) > cfg.trust_halfwidth)
                throw NumericFailure("flow left the trust box");
        }
    };
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(cfg.abs_tol, cfg.rel_tol,
                                        ode::runge_kutta_dopri5<State>());
    double dt = (time >= 0 ? 1.0 : -1.0) * std::max(1e-6, std::abs(time) / 64.0);
    try {
        ode::integrate_adaptive(stepper, rhs, x, 0.0, time, dt, guard);
    } catch (const NumericFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericFailure(std::string("integration failure: ") + e.what());
    }
    FlowResult res;
    res.endpoint = x;
    res.method = FlowMethod::Numeric;
    double norm = 0.0;
    for (double v : x) norm = std::max(norm, std::abs(v));
    res.estimated_error = cfg.rel_tol * (1.0 + norm) * 10.0;
    return res;
}

}  // namespace

FlowResult flow(const DField& X, const std::vector<double>& p, double time,
                const FlowConfig& cfg) {
    if (static_cast<int>(p.size()) != X.dim())
        throw UsageError("flow start point dimension mismatch");
    if (!std::isfinite(time)) throw UsageError("flow time must be finite");
    if (cfg.allow_exact_series) {
        auto terms = lie_series_terms(X, cfg.series_cap);
        if (terms) return exact_series_flow(*terms, p, time);
    }
    if (!cfg.allow_numeric)
        throw NumericFailure("series did not terminate and numeric path is disabled");
    return numeric_flow(X, p, time, cfg);
}

FlowResult exp_combination(const std::vector<double>& coeffs,
                           const std::vector<DField>& fields,
                           const std::vector<double>& p, const FlowConfig& cfg) {
    if (coeffs.size() != fields.size())
        throw UsageError("coefficient / field index sets do not match");
    if (fields.empty()) {
        FlowResult res;
        res.endpoint = p;
        return res;
    }
    DField combined = VecField<double>::zero(fields.front().chart());
    for (size_t i = 0; i < fields.size(); ++i) {
        fields.front().check_chart(fields[i]);
        if (coeffs[i] != 0.0) combined = combined + fields[i].scaled(coeffs[i]);
    }
    return flow(combined, p, 1.0, cfg);
}

FlowResult exp_combination(const std::vector<double>& coeffs,
                           const std::vector<RField>& fields,
                           const std::vector<double>& p, const FlowConfig& cfg) {
    std::vector<DField> dfields;
    dfields.reserve(fields.size());
    for (const auto& f : fields) dfields.push_back(f.to_double());
    return exp_combination(coeffs, dfields, p, cfg);
}

FlowResult exp_product(const std::vector<std::pair<double, DField>>& steps,
                       const std::vector<double>& p, const FlowConfig& cfg) {
    if (steps.empty()) throw UsageError("exp_product needs at least one step");
    FlowResult res;
    res.endpoint = p;
    res.method = FlowMethod::ExactSeries;
    res.estimated_error = 0.0;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        FlowResult step = flow(it->second, res.endpoint, it->first, cfg);
        res.endpoint = std::move(step.endpoint);
        if (step.method == FlowMethod::Numeric) res.method = FlowMethod::Numeric;
        res.estimated_error += step.estimated_error;
    }
    return res;
}

std::optional<SymbolicEndpoint> SymbolicEndpoint::build(const std::vector<RField>& fields,
                                                        int series_cap) {
    if (fields.empty()) return std::nullopt;
    const int n = fields.front().chart().dim();
    const int k = static_cast<int>(fields.size());
    // extended ring: x_1..x_n, w_1..w_k; the field moves only the x block
    Chart ext = Chart::numbered(n + k, "u");
    std::vector<int> xmap(n);
    for (int i = 0; i < n; ++i) xmap[i] = i;
    std::vector<RPoly> comps(n + k, RPoly(n + k));
    for (int c = 0; c < k; ++c) {
        fields.front().check_chart(fields[c]);
        RPoly w = RPoly::variable(n + k, n + c);
        for (int j = 0; j < n; ++j)
            comps[j] += w * fields[c].component(j).embed(n + k, xmap);
    }
    RField combined(ext, comps);
    auto terms = lie_series_terms(combined, series_cap);
    if (!terms) return std::nullopt;

    SymbolicEndpoint se;
    se.n_ = n;
    se.k_ = k;
    se.comps_.reserve(n);
    for (int j = 0; j < n; ++j) {
        RPoly acc(n + k);
        Rational fact = 1;
        for (size_t step = 0; step < terms->size(); ++step) {
            if (step > 0) fact *= static_cast<int>(step);
            acc += (*terms)[step][j].scaled(Rational(1) / fact);
        }
        se.comps_.push_back(acc.to_double());
    }
    se.jac_.resize(n);
    for (int j = 0; j < n; ++j) {
        se.jac_[j].reserve(k);
        for (int c = 0; c < k; ++c) se.jac_[j].push_back(se.comps_[j].derivative(n + c));
    }
    return se;
}

std::vector<double> SymbolicEndpoint::evaluate(const std::vector<double>& p,
                                               const std::vector<double>& controls) const {
    if (static_cast<int>(p.size()) != n_ || static_cast<int>(controls.size()) != k_)
        throw UsageError("symbolic endpoint dimension mismatch");
    std::vector<double> z = p;
    z.insert(z.end(), controls.begin(), controls.end());
    std::vector<double> out(n_);
    for (int j = 0; j < n_; ++j) out[j] = comps_[j].evaluate<double>(z);
    return out;
}

std::vector<std::vector<double>> SymbolicEndpoint::control_jacobian(
    const std::vector<double>& p, const std::vector<double>& controls) const {
    std::vector<double> z = p;
    z.insert(z.end(), controls.begin(), controls.end());
    std::vector<std::vector<double>> out(n_, std::vector<double>(k_));
    for (int j = 0; j < n_; ++j)
        for (int c = 0; c < k_; ++c) out[j][c] = jac_[j][c].evaluate<double>(z);
    return out;
}

std::optional<std::vector<RPoly>> symbolic_time_flow(const RField& Y, int series_cap) {
    const int n = Y.dim();
    auto terms = lie_series_terms(Y, series_cap);
    if (!terms) return std::nullopt;
    std::vector<int> xmap(n);
    for (int i = 0; i < n; ++i) xmap[i] = i;
    RPoly s = RPoly::variable(n + 1, n);
    std::vector<RPoly> out;
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
        RPoly acc(n + 1);
        Rational fact = 1;
        RPoly spow = RPoly::constant(n + 1, Rational(1));
        for (size_t step = 0; step < terms->size(); ++step) {
            if (step > 0) {
                fact *= static_cast<int>(step);
                spow = spow * s;
            }
            acc += (*terms)[step][j].embed(n + 1, xmap) * spow.scaled(Rational(1) / fact);
        }
        out.push_back(acc);
    }
    return out;
}

}  // namespace ccw
