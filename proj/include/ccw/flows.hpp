#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ccw/vec_field.hpp"

namespace ccw {

struct FlowConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    // Flows abort once the trajectory leaves the box |x_i - p_i| <= trust_halfwidth.
    double trust_halfwidth = 10.0;
    // Exact-series cutoff: if the k-th iterated derivative of every coordinate
    // vanishes for some k <= series_cap, the terminating series is summed exactly.
    int series_cap = 24;
    bool allow_exact_series = true;
    bool allow_numeric = true;
};

enum class FlowMethod { ExactSeries, Numeric };

struct FlowResult {
    std::vector<double> endpoint;
    FlowMethod method = FlowMethod::ExactSeries;
    double estimated_error = 0.0;  // exactly 0 for the exact-series path
};

/// Iterated-derivation coordinate series of exp(t X); nullopt when the field
/// is not nilpotent as a derivation within the cap. Index k holds the
/// polynomials (X^k x_j), to be summed with t^k / k!.
template <class K>
std::optional<std::vector<std::vector<Poly<K>>>> lie_series_terms(const VecField<K>& X,
                                                                  int cap) {
    const int n = X.dim();
    std::vector<std::vector<Poly<K>>> terms;
    std::vector<Poly<K>> cur;
    cur.reserve(n);
    for (int j = 0; j < n; ++j) cur.push_back(Poly<K>::variable(n, j));
    terms.push_back(cur);
    for (int k = 1; k <= cap; ++k) {
        std::vector<Poly<K>> next;
        next.reserve(n);
        bool all_zero = true;
        for (int j = 0; j < n; ++j) {
            Poly<K> d = X.apply(cur[j]);
            if (!d.is_zero()) all_zero = false;
            next.push_back(std::move(d));
        }
        if (all_zero) return terms;
        terms.push_back(next);
        cur = std::move(next);
    }
    return std::nullopt;
}

FlowResult flow(const DField& X, const std::vector<double>& p, double time,
                const FlowConfig& cfg = {});

inline FlowResult flow(const RField& X, const std::vector<double>& p, double time,
                       const FlowConfig& cfg = {}) {
    return flow(X.to_double(), p, time, cfg);
}

/// Endpoint of the unit-time flow of the frozen combination sum_i coeffs[i] * fields[i].
FlowResult exp_combination(const std::vector<double>& coeffs,
                           const std::vector<DField>& fields,
                           const std::vector<double>& p, const FlowConfig& cfg = {});

FlowResult exp_combination(const std::vector<double>& coeffs,
                           const std::vector<RField>& fields,
                           const std::vector<double>& p, const FlowConfig& cfg = {});

/// Right-to-left composition: for steps [(c1,F1),...,(cn,Fn)] computes
/// exp(c1 F1) o exp(c2 F2) o ... o exp(cn Fn)(p); the last entry flows first.
FlowResult exp_product(const std::vector<std::pair<double, DField>>& steps,
                       const std::vector<double>& p, const FlowConfig& cfg = {});

/// Exact polynomial endpoint map of exp(sum_k w_k X_k) over the extended ring
/// (x_1..x_N, w_1..w_K); exists when the symbolic combination is nilpotent as
/// a derivation. Evaluating at (p, w) gives the unit-time endpoint; the control
/// Jacobian comes from symbolic derivatives.
class SymbolicEndpoint {
public:
    static std::optional<SymbolicEndpoint> build(const std::vector<RField>& fields,
                                                 int series_cap = 24);

    int point_dim() const { return n_; }
    int control_dim() const { return k_; }

    std::vector<double> evaluate(const std::vector<double>& p,
                                 const std::vector<double>& controls) const;

    // d endpoint_i / d control_j, row-major n x k.
    std::vector<std::vector<double>> control_jacobian(const std::vector<double>& p,
                                                      const std::vector<double>& controls) const;

    const std::vector<DPoly>& components() const { return comps_; }

private:
    int n_ = 0, k_ = 0;
    std::vector<DPoly> comps_;
    std::vector<std::vector<DPoly>> jac_;  // [i][j] = d comps_[i] / d w_j
};

/// Endpoint of exp(s Y)(x) as exact polynomials over (x_1..x_N, s), when the
/// single-field series terminates. Variable N is the time symbol.
std::optional<std::vector<RPoly>> symbolic_time_flow(const RField& Y, int series_cap = 24);

}  // namespace ccw
