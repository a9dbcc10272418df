#pragma once

#include <string>
#include <vector>

#include "ccw/rng.hpp"
#include "ccw/spacefile.hpp"

namespace ccw::testing {

inline WeightedSystem space(const std::string& name) { return to_system(catalog(name)); }

inline RatVec origin(int n) { return RatVec(n, Rational(0)); }

inline std::vector<double> dvec(std::initializer_list<double> xs) { return xs; }

// random small-rational polynomial field for property tests
inline RField random_field(const Chart& chart, CounterRng& rng, int max_degree = 2) {
    const int n = chart.dim();
    std::vector<RPoly> comps(n, RPoly(n));
    for (int j = 0; j < n; ++j) {
        int terms = 1 + static_cast<int>(rng.next_bits() % 3);
        for (int t = 0; t < terms; ++t) {
            Mono m(n, 0);
            int deg = static_cast<int>(rng.next_bits() % (max_degree + 1));
            for (int d = 0; d < deg; ++d) m[rng.next_bits() % n] += 1;
            long num = static_cast<long>(rng.next_bits() % 9) - 4;
            long den = 1 + static_cast<long>(rng.next_bits() % 3);
            if (num != 0) comps[j].add_term(m, Rational(num, den));
        }
    }
    return RField(chart, comps);
}

inline RatVec random_rational_point(int n, CounterRng& rng, long denom = 8) {
    RatVec p;
    for (int i = 0; i < n; ++i) {
        long num = static_cast<long>(rng.next_bits() % (2 * denom + 1)) - denom;
        p.push_back(Rational(num, denom));
    }
    return p;
}

}  // namespace ccw::testing
