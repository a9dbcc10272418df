#pragma once

#include <optional>
#include <vector>

#include "ccw/poly.hpp"
#include "ccw/rational.hpp"

namespace ccw {

using RatVec = std::vector<Rational>;
using RatMat = std::vector<std::vector<Rational>>;  // row major

inline int rat_rank(RatMat m) {
    if (m.empty()) return 0;
    const int rows = static_cast<int>(m.size());
    const int cols = static_cast<int>(m[0].size());
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (m[r][c] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(m[rank], m[pivot]);
        for (int r = 0; r < rows; ++r) {
            if (r == rank || m[r][c] == 0) continue;
            Rational f = m[r][c] / m[rank][c];
            for (int k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
        }
        ++rank;
    }
    return rank;
}

/// Greedy independent column subset in the given column order; returns the
/// selected indices. Used for rank witnesses and adapted-frame selection.
inline std::vector<int> rat_greedy_independent(const RatMat& columns_as_rows) {
    // input: each entry is one candidate vector
    std::vector<int> chosen;
    RatMat basis;  // row-reduced accumulation
    for (int idx = 0; idx < static_cast<int>(columns_as_rows.size()); ++idx) {
        RatVec v = columns_as_rows[idx];
        // reduce v against current basis
        for (const auto& b : basis) {
            int lead = -1;
            for (int k = 0; k < static_cast<int>(b.size()); ++k)
                if (b[k] != 0) {
                    lead = k;
                    break;
                }
            if (lead >= 0 && v[lead] != 0) {
                Rational f = v[lead] / b[lead];
                for (int k = 0; k < static_cast<int>(b.size()); ++k) v[k] -= f * b[k];
            }
        }
        bool nonzero = false;
        for (const auto& x : v)
            if (x != 0) {
                nonzero = true;
                break;
            }
        if (nonzero) {
            // normalize so the leading entry is 1, keeps reductions cheap
            int lead = -1;
            for (int k = 0; k < static_cast<int>(v.size()); ++k)
                if (v[k] != 0) {
                    lead = k;
                    break;
                }
            Rational inv = 1 / v[lead];
            for (auto& x : v) x *= inv;
            basis.push_back(std::move(v));
            chosen.push_back(idx);
        }
    }
    return chosen;
}

/// Solves A x = b exactly; returns nullopt when inconsistent. If the system is
/// underdetermined the free variables are set to zero.
inline std::optional<RatVec> rat_solve(RatMat a, RatVec b) {
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    std::vector<int> pivot_col;
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (a[r][c] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(a[rank], a[pivot]);
        std::swap(b[rank], b[pivot]);
        for (int r = 0; r < rows; ++r) {
            if (r == rank || a[r][c] == 0) continue;
            Rational f = a[r][c] / a[rank][c];
            for (int k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
            b[r] -= f * b[rank];
        }
        pivot_col.push_back(c);
        ++rank;
    }
    for (int r = rank; r < rows; ++r)
        if (b[r] != 0) return std::nullopt;
    RatVec x(cols, Rational(0));
    for (int i = 0; i < rank; ++i) x[pivot_col[i]] = b[i] / a[i][pivot_col[i]];
    return x;
}

/// Kernel basis of A (columns = unknowns), reduced echelon style: one basis
/// vector per free column, deterministic in column order.
inline RatMat rat_kernel(RatMat a) {
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    std::vector<int> pivot_of_col(cols, -1);
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (a[r][c] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(a[rank], a[pivot]);
        Rational inv = 1 / a[rank][c];
        for (int k = c; k < cols; ++k) a[rank][k] *= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == rank || a[r][c] == 0) continue;
            Rational f = a[r][c];
            for (int k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
        }
        pivot_of_col[c] = rank;
        ++rank;
    }
    RatMat kernel;
    for (int c = 0; c < cols; ++c) {
        if (pivot_of_col[c] >= 0) continue;
        RatVec v(cols, Rational(0));
        v[c] = 1;
        for (int c2 = 0; c2 < cols; ++c2) {
            int pr = pivot_of_col[c2];
            if (pr >= 0) v[c2] = -a[pr][c];
        }
        kernel.push_back(std::move(v));
    }
    return kernel;
}

/// Generic rank of a matrix with polynomial entries over the rational function
/// field: fraction-free elimination, pivots are not-identically-zero polynomials.
/// This is the rank attained off a proper subvariety.
inline int symbolic_rank(std::vector<std::vector<RPoly>> m) {
    if (m.empty()) return 0;
    const int rows = static_cast<int>(m.size());
    const int cols = static_cast<int>(m[0].size());
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (!m[r][c].is_zero()) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(m[rank], m[pivot]);
        for (int r = rank + 1; r < rows; ++r) {
            if (m[r][c].is_zero()) continue;
            // cross multiplication keeps entries polynomial
            RPoly lead = m[r][c];
            for (int k = c; k < cols; ++k)
                m[r][k] = m[r][k] * m[rank][c] - m[rank][k] * lead;
        }
        ++rank;
    }
    return rank;
}

}  // namespace ccw
