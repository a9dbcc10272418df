#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ccw/errors.hpp"
#include "ccw/rational.hpp"

namespace ccw {

// Exponent multi-index; length always equals the variable count of the
// polynomial that owns it.
using Mono = std::vector<int>;

inline int total_degree(const Mono& m) {
    return std::accumulate(m.begin(), m.end(), 0);
}

inline long weighted_degree(const Mono& m, const std::vector<int>& weights) {
    long d = 0;
    for (size_t i = 0; i < m.size(); ++i) d += static_cast<long>(m[i]) * weights[i];
    return d;
}

// Graded lexicographic order: total degree first, then lex. Term iteration
// and printed output are deterministic under this order.
struct GradedLex {
    bool operator()(const Mono& a, const Mono& b) const {
        int da = total_degree(a), db = total_degree(b);
        if (da != db) return da < db;
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

namespace detail {
inline bool coeff_is_zero(const Rational& c) { return c == 0; }
inline bool coeff_is_zero(double c) { return c == 0.0; }
}  // namespace detail

/// Sparse multivariate polynomial over coefficient ring K (Rational for the
/// exact symbolic layer, double at numeric boundaries).
template <class K>
class Poly {
public:
    using Terms = std::map<Mono, K, GradedLex>;

    Poly() : nvars_(0) {}
    explicit Poly(int nvars) : nvars_(nvars) {}

    static Poly constant(int nvars, const K& c) {
        Poly p(nvars);
        if (!detail::coeff_is_zero(c)) p.terms_[Mono(nvars, 0)] = c;
        return p;
    }

    static Poly variable(int nvars, int index, const K& coeff = K(1)) {
        Poly p(nvars);
        Mono m(nvars, 0);
        m[index] = 1;
        if (!detail::coeff_is_zero(coeff)) p.terms_[m] = coeff;
        return p;
    }

    static Poly monomial(int nvars, const Mono& m, const K& coeff) {
        Poly p(nvars);
        if (!detail::coeff_is_zero(coeff)) p.terms_[m] = coeff;
        return p;
    }

    int nvars() const { return nvars_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const {
        return terms_.empty() ||
               (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
    }

    K constant_term() const {
        Mono zero(nvars_, 0);
        auto it = terms_.find(zero);
        return it == terms_.end() ? K(0) : it->second;
    }

    int degree() const {
        int d = -1;
        for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
        return d;
    }

    void add_term(const Mono& m, const K& c) {
        if (static_cast<int>(m.size()) != nvars_)
            throw UsageError("monomial length does not match variable count");
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            if (!detail::coeff_is_zero(c)) terms_.emplace(m, c);
        } else {
            it->second += c;
            if (detail::coeff_is_zero(it->second)) terms_.erase(it);
        }
    }

    Poly& operator+=(const Poly& o) {
        check_same_ring(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        check_same_ring(o);
        for (const auto& [m, c] : o.terms_) add_term(m, K(-c));
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

    Poly operator-() const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) r.terms_[m] = -c;
        return r;
    }

    friend Poly operator*(const Poly& a, const Poly& b) {
        a.check_same_ring(b);
        Poly r(a.nvars_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                Mono m(a.nvars_);
                for (int i = 0; i < a.nvars_; ++i) m[i] = ma[i] + mb[i];
                r.add_term(m, ca * cb);
            }
        return r;
    }

    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    Poly scaled(const K& s) const {
        Poly r(nvars_);
        if (detail::coeff_is_zero(s)) return r;
        for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
        return r;
    }

    bool operator==(const Poly& o) const {
        return nvars_ == o.nvars_ && terms_ == o.terms_;
    }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    Poly derivative(int var) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) {
            if (m[var] == 0) continue;
            Mono d = m;
            d[var] -= 1;
            r.add_term(d, c * K(m[var]));
        }
        return r;
    }

    template <class V>
    V evaluate(const std::vector<V>& point) const {
        if (static_cast<int>(point.size()) != nvars_)
            throw UsageError("point dimension does not match variable count");
        V acc(0);
        for (const auto& [m, c] : terms_) {
            V t = coeff_as<V>(c);
            for (int i = 0; i < nvars_; ++i)
                for (int e = 0; e < m[i]; ++e) t *= point[i];
            acc += t;
        }
        return acc;
    }

    // Substitutes subs[i] for variable i; subs share one target ring.
    Poly compose(const std::vector<Poly>& subs) const {
        if (static_cast<int>(subs.size()) != nvars_)
            throw UsageError("substitution list length does not match variable count");
        int out_vars = subs.empty() ? 0 : subs.front().nvars();
        Poly r(out_vars);
        // per-variable power cache
        std::vector<std::vector<Poly>> powers(nvars_);
        for (int i = 0; i < nvars_; ++i) powers[i].push_back(Poly::constant(out_vars, K(1)));
        auto power = [&](int i, int e) -> const Poly& {
            auto& cache = powers[i];
            while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * subs[i]);
            return cache[e];
        };
        for (const auto& [m, c] : terms_) {
            Poly t = Poly::constant(out_vars, c);
            for (int i = 0; i < nvars_; ++i)
                if (m[i] > 0) t = t * power(i, m[i]);
            r += t;
        }
        return r;
    }

    Poly truncate_total_degree(int maxdeg) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_)
            if (total_degree(m) <= maxdeg) r.terms_[m] = c;
        return r;
    }

    // Keeps monomials whose weighted degree satisfies pred.
    template <class Pred>
    Poly filter_weighted(const std::vector<int>& weights, Pred pred) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_)
            if (pred(weighted_degree(m, weights))) r.terms_[m] = c;
        return r;
    }

    Poly<double> to_double() const {
        Poly<double> r(nvars_);
        for (const auto& [m, c] : terms_) r.add_term(m, coeff_as<double>(c));
        return r;
    }

    // Renumbers variables into a larger ring: variable i becomes var_map[i].
    Poly embed(int new_nvars, const std::vector<int>& var_map) const {
        Poly r(new_nvars);
        for (const auto& [m, c] : terms_) {
            Mono mm(new_nvars, 0);
            for (int i = 0; i < nvars_; ++i) mm[var_map[i]] = m[i];
            r.add_term(mm, c);
        }
        return r;
    }

    double max_abs_coeff() const {
        double best = 0.0;
        for (const auto& [m, c] : terms_) best = std::max(best, std::abs(coeff_as<double>(c)));
        return best;
    }

private:
    template <class V>
    static V coeff_as(const K& c) {
        if constexpr (std::is_same_v<K, Rational> && std::is_same_v<V, double>)
            return ccw::to_double(c);
        else
            return V(c);
    }

    void check_same_ring(const Poly& o) const {
        if (nvars_ != o.nvars_)
            throw UsageError("polynomial ring mismatch (different variable counts)");
    }

    int nvars_;
    Terms terms_;
};

using RPoly = Poly<Rational>;
using DPoly = Poly<double>;

inline std::string format_coeff(const Rational& c) { return c.str(); }
inline std::string format_coeff(double c) {
    std::ostringstream os;
    os.precision(17);
    os << c;
    return os.str();
}

/// Canonical rendering: monomials in descending graded-lex order, explicit
/// rational coefficients, '*' between factors, '^' for powers.
template <class K>
std::string to_string(const Poly<K>& p, const std::vector<std::string>& names) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        const auto& [m, c] = *it;
        std::string cs = format_coeff(c);
        bool neg = !cs.empty() && cs[0] == '-';
        if (neg) cs = cs.substr(1);
        os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
        first = false;
        std::vector<std::string> factors;
        if (cs != "1" || total_degree(m) == 0) factors.push_back(cs);
        for (size_t i = 0; i < m.size(); ++i) {
            if (m[i] == 0) continue;
            if (m[i] == 1)
                factors.push_back(names[i]);
            else
                factors.push_back(names[i] + "^" + std::to_string(m[i]));
        }
        for (size_t i = 0; i < factors.size(); ++i) {
            if (i) os << "*";
            os << factors[i];
        }
    }
    return os.str();
}

}  // namespace ccw
