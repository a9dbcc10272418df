#pragma once

#include <map>
#include <string>
#include <vector>

#include "ccw/poly.hpp"

namespace ccw {

/// Coordinate chart: a dimension and distinct coordinate labels.
struct Chart {
    std::vector<std::string> names;

    Chart() = default;
    explicit Chart(std::vector<std::string> n) : names(std::move(n)) {
        if (names.empty()) throw UsageError("chart must have dimension >= 1");
        for (size_t i = 0; i < names.size(); ++i)
            for (size_t j = i + 1; j < names.size(); ++j)
                if (names[i] == names[j])
                    throw UsageError("chart coordinate names must be distinct: '" +
                                     names[i] + "'");
    }

    int dim() const { return static_cast<int>(names.size()); }
    bool operator==(const Chart& o) const { return names == o.names; }
    bool operator!=(const Chart& o) const { return !(*this == o); }

    static Chart numbered(int n, const std::string& prefix = "x") {
        std::vector<std::string> names;
        names.reserve(n);
        for (int i = 1; i <= n; ++i) names.push_back(prefix + std::to_string(i));
        return Chart(std::move(names));
    }
};

/// Polynomial vector field: one component polynomial per chart coordinate,
/// viewed as the first-order operator  sum_j comp[j] * d/dx_j.
template <class K>
class VecField {
public:
    VecField() = default;
    VecField(Chart chart, std::vector<Poly<K>> components)
        : chart_(std::move(chart)), comps_(std::move(components)) {
        if (static_cast<int>(comps_.size()) != chart_.dim())
            throw UsageError("component count does not match chart dimension");
        for (const auto& c : comps_)
            if (c.nvars() != chart_.dim())
                throw UsageError("component polynomial over wrong variable count");
    }

    static VecField zero(const Chart& chart) {
        std::vector<Poly<K>> comps(chart.dim(), Poly<K>(chart.dim()));
        return VecField(chart, std::move(comps));
    }

    static VecField coordinate(const Chart& chart, int j) {
        VecField f = zero(chart);
        f.comps_[j] = Poly<K>::constant(chart.dim(), K(1));
        return f;
    }

    const Chart& chart() const { return chart_; }
    int dim() const { return chart_.dim(); }
    const std::vector<Poly<K>>& components() const { return comps_; }
    const Poly<K>& component(int j) const { return comps_[j]; }
    Poly<K>& component(int j) { return comps_[j]; }

    bool is_zero() const {
        for (const auto& c : comps_)
            if (!c.is_zero()) return false;
        return true;
    }

    bool operator==(const VecField& o) const {
        return chart_ == o.chart_ && comps_ == o.comps_;
    }
    bool operator!=(const VecField& o) const { return !(*this == o); }

    VecField operator+(const VecField& o) const {
        check_chart(o);
        std::vector<Poly<K>> comps;
        comps.reserve(comps_.size());
        for (size_t j = 0; j < comps_.size(); ++j) comps.push_back(comps_[j] + o.comps_[j]);
        return VecField(chart_, std::move(comps));
    }

    VecField operator-(const VecField& o) const {
        check_chart(o);
        std::vector<Poly<K>> comps;
        comps.reserve(comps_.size());
        for (size_t j = 0; j < comps_.size(); ++j) comps.push_back(comps_[j] - o.comps_[j]);
        return VecField(chart_, std::move(comps));
    }

    VecField scaled(const K& s) const {
        std::vector<Poly<K>> comps;
        comps.reserve(comps_.size());
        for (const auto& c : comps_) comps.push_back(c.scaled(s));
        return VecField(chart_, std::move(comps));
    }

    /// X applied to a scalar polynomial as a derivation.
    Poly<K> apply(const Poly<K>& f) const {
        Poly<K> r(chart_.dim());
        for (int i = 0; i < chart_.dim(); ++i) {
            if (comps_[i].is_zero()) continue;
            r += comps_[i] * f.derivative(i);
        }
        return r;
    }

    template <class V>
    std::vector<V> evaluate(const std::vector<V>& p) const {
        if (static_cast<int>(p.size()) != chart_.dim())
            throw UsageError("point dimension does not match chart dimension");
        std::vector<V> v;
        v.reserve(comps_.size());
        for (const auto& c : comps_) v.push_back(c.template evaluate<V>(p));
        return v;
    }

    VecField<double> to_double() const {
        std::vector<Poly<double>> comps;
        comps.reserve(comps_.size());
        for (const auto& c : comps_) comps.push_back(c.to_double());
        return VecField<double>(chart_, std::move(comps));
    }

    void check_chart(const VecField& o) const {
        if (chart_ != o.chart_) throw UsageError("vector fields live on different charts");
    }

private:
    Chart chart_;
    std::vector<Poly<K>> comps_;
};

using RField = VecField<Rational>;
using DField = VecField<double>;

/// Exact componentwise linear combination; all fields must share one chart.
template <class K>
VecField<K> linear_combination(const std::vector<K>& coeffs,
                               const std::vector<VecField<K>>& fields) {
    if (coeffs.size() != fields.size())
        throw UsageError("coefficient / field count mismatch in linear combination");
    if (fields.empty()) throw UsageError("linear combination of an empty field list");
    VecField<K> acc = VecField<K>::zero(fields.front().chart());
    for (size_t i = 0; i < fields.size(); ++i) {
        fields.front().check_chart(fields[i]);
        acc = acc + fields[i].scaled(coeffs[i]);
    }
    return acc;
}

/// [X,Y] = XY - YX, computed exactly on polynomial components.
template <class K>
VecField<K> lie_bracket(const VecField<K>& X, const VecField<K>& Y) {
    X.check_chart(Y);
    const int n = X.dim();
    std::vector<Poly<K>> comps;
    comps.reserve(n);
    for (int j = 0; j < n; ++j) {
        Poly<K> c(n);
        for (int i = 0; i < n; ++i) {
            if (!X.component(i).is_zero()) c += X.component(i) * Y.component(j).derivative(i);
            if (!Y.component(i).is_zero()) c -= Y.component(i) * X.component(j).derivative(i);
        }
        comps.push_back(std::move(c));
    }
    return VecField<K>(X.chart(), std::move(comps));
}

/// Splits X by homogeneity order: the part of order s collects monomial /
/// component pairs with |alpha|_h - w_j = s, so that the dilation pullback
/// identity  delta_eps^* part = eps^s part  holds termwise.
template <class K>
std::map<long, VecField<K>> graded_parts(const VecField<K>& X,
                                         const std::vector<int>& weights) {
    if (static_cast<int>(weights.size()) != X.dim())
        throw UsageError("weight list length does not match chart dimension");
    std::map<long, VecField<K>> parts;
    for (int j = 0; j < X.dim(); ++j) {
        for (const auto& [m, c] : X.component(j).terms()) {
            long order = weighted_degree(m, weights) - weights[j];
            auto it = parts.find(order);
            if (it == parts.end())
                it = parts.emplace(order, VecField<K>::zero(X.chart())).first;
            it->second.component(j).add_term(m, c);
        }
    }
    return parts;
}

/// The single graded part of a given order (zero field if absent).
template <class K>
VecField<K> graded_part(const VecField<K>& X, const std::vector<int>& weights,
                        long order) {
    auto parts = graded_parts(X, weights);
    auto it = parts.find(order);
    return it == parts.end() ? VecField<K>::zero(X.chart()) : it->second;
}

/// Exact homogeneity test: delta_eps^* X = eps^s X as polynomial identity.
/// The pullback acts on a field by  (delta_eps^* X)_j(x) = eps^{-w_j} X_j(delta_eps x).
template <class K>
bool is_homogeneous_of_order(const VecField<K>& X, const std::vector<int>& weights,
                             long order) {
    for (int j = 0; j < X.dim(); ++j)
        for (const auto& [m, c] : X.component(j).terms())
            if (weighted_degree(m, weights) - weights[j] != order) return false;
    return true;
}

/// Exact dilation pullback with a rational parameter:
///   (delta_eps^* X)_j(x) = eps^{-w_j} X_j(eps^{w_1} x_1, ..., eps^{w_N} x_N).
inline RField dilation_pullback(const RField& X, const std::vector<int>& weights,
                                const Rational& eps) {
    const int n = X.dim();
    std::vector<RPoly> subs;
    subs.reserve(n);
    for (int i = 0; i < n; ++i)
        subs.push_back(RPoly::variable(n, i, rational_pow(eps, weights[i])));
    std::vector<RPoly> comps;
    comps.reserve(n);
    for (int j = 0; j < n; ++j)
        comps.push_back(X.component(j).compose(subs).scaled(1 / rational_pow(eps, weights[j])));
    return RField(X.chart(), std::move(comps));
}

}  // namespace ccw
