#include "ccw/structure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <sstream>

#include "ccw/errors.hpp"
#include "ccw/rng.hpp"

namespace ccw {

std::string word_to_string(const Word& w) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) os << " ";
        os << (w[i] + 1);
    }
    os << ")";
    return os.str();
}

namespace {

struct WordLess {
    bool operator()(const Word& a, const Word& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

void gen_words(const WeightedSystem& sys, Word& prefix, int hdeg,
               std::vector<std::pair<int, Word>>& out) {
    if (!prefix.empty()) out.emplace_back(hdeg, prefix);
    for (int i = 0; i < sys.q(); ++i) {
        int nd = hdeg + sys.weights[i];
        if (nd > sys.depth) continue;
        prefix.push_back(i);
        gen_words(sys, prefix, nd, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<CommutatorWord> enumerate_commutators(const WeightedSystem& sys) {
    std::vector<std::pair<int, Word>> raw;
    Word prefix;
    gen_words(sys, prefix, 0, raw);
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return WordLess{}(a.second, b.second);
    });
    // expand fields right-to-left with suffix memoization
    std::map<Word, RField, WordLess> cache;
    for (int i = 0; i < sys.q(); ++i) cache[{i}] = sys.generators[i];
    std::function<const RField&(const Word&)> expand = [&](const Word& w) -> const RField& {
        auto it = cache.find(w);
        if (it != cache.end()) return it->second;
        Word tail(w.begin() + 1, w.end());
        RField f = lie_bracket(sys.generators[w.front()], expand(tail));
        return cache.emplace(w, std::move(f)).first->second;
    };
    std::vector<CommutatorWord> out;
    out.reserve(raw.size());
    for (const auto& [hdeg, w] : raw) {
        CommutatorWord cw;
        cw.word = w;
        cw.hdeg = hdeg;
        cw.field = expand(w);
        cw.is_zero = cw.field.is_zero();
        out.push_back(std::move(cw));
    }
    return out;
}

RatMat word_values(const std::vector<CommutatorWord>& words, const RatVec& p) {
    RatMat m;
    m.reserve(words.size());
    for (const auto& w : words) m.push_back(w.field.evaluate<Rational>(p));
    return m;
}

std::optional<int> minimal_depth_at(const WeightedSystem& sys, const RatVec& p,
                                    int max_depth) {
    WeightedSystem probe = sys;
    probe.depth = max_depth;
    auto words = enumerate_commutators(probe);
    const int n = sys.dim();
    for (int k = 1; k <= max_depth; ++k) {
        RatMat rows;
        for (const auto& w : words)
            if (w.hdeg <= k && !w.is_zero) rows.push_back(w.field.evaluate<Rational>(p));
        if (rat_rank(rows) == n) return k;
    }
    return std::nullopt;
}

void validate_system(const WeightedSystem& sys) {
    if (sys.q() < 1) throw UsageError("a weighted system needs at least one generator");
    if (static_cast<int>(sys.weights.size()) != sys.q())
        throw UsageError("weight count does not match generator count");
    for (int w : sys.weights)
        if (w < 1) throw UsageError("weights must be positive integers");
    for (size_t i = 1; i < sys.weights.size(); ++i)
        if (sys.weights[i] < sys.weights[i - 1])
            throw UsageError("weights must be sorted nondecreasing");
    if (sys.depth < 1) throw UsageError("depth must be >= 1");
    if (static_cast<int>(sys.anchor.size()) != sys.dim())
        throw UsageError("anchor dimension does not match chart dimension");
    auto snap = filtration_dims(sys, sys.anchor);
    if (snap.dims.back() != sys.dim())
        throw StructuralDefect("generators and commutators up to the declared depth do not span the tangent space at the anchor");
    if (sys.depth > 1 && snap.dims[sys.depth - 2] == sys.dim())
        throw StructuralDefect("declared depth is not minimal at the anchor (filtration already full at level " +
                               std::to_string(sys.depth - 1) + ")");
}

FiltrationSnapshot filtration_dims(const WeightedSystem& sys,
                                   const std::vector<CommutatorWord>& words,
                                   const RatVec& p) {
    if (static_cast<int>(p.size()) != sys.dim())
        throw UsageError("point dimension does not match chart dimension");
    FiltrationSnapshot snap;
    snap.point = p;
    for (int k = 1; k <= sys.depth; ++k) {
        RatMat rows;
        std::vector<const CommutatorWord*> index;
        for (const auto& w : words)
            if (w.hdeg <= k && !w.is_zero) {
                rows.push_back(w.field.evaluate<Rational>(p));
                index.push_back(&w);
            }
        auto chosen = rat_greedy_independent(rows);
        snap.dims.push_back(static_cast<int>(chosen.size()));
        std::vector<Word> wit;
        wit.reserve(chosen.size());
        for (int c : chosen) wit.push_back(index[c]->word);
        snap.witnesses.push_back(std::move(wit));
    }
    if (snap.dims.back() < sys.dim())
        throw StructuralDefect("filtration is not full at " + std::to_string(sys.depth) +
                               " (dim " + std::to_string(snap.dims.back()) + " < " +
                               std::to_string(sys.dim()) + "): span condition fails at the point");
    return snap;
}

FiltrationSnapshot filtration_dims(const WeightedSystem& sys, const RatVec& p) {
    return filtration_dims(sys, enumerate_commutators(sys), p);
}

std::vector<int> filtration_dims_numeric(const WeightedSystem& sys,
                                         const std::vector<double>& p) {
    auto words = enumerate_commutators(sys);
    std::vector<int> dims;
    for (int k = 1; k <= sys.depth; ++k) {
        std::vector<std::vector<double>> rows;
        for (const auto& w : words)
            if (w.hdeg <= k && !w.is_zero) rows.push_back(w.field.to_double().evaluate(p));
        Eigen::MatrixXd m(rows.size(), sys.dim());
        for (size_t r = 0; r < rows.size(); ++r)
            for (int c = 0; c < sys.dim(); ++c) m(r, c) = rows[r][c];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        double thresh = 1e-9 * (svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > thresh) ++rank;
        dims.push_back(rank);
    }
    return dims;
}

std::string to_string(Regularity r) {
    switch (r) {
        case Regularity::Regular: return "Regular";
        case Regularity::Nonregular: return "Nonregular";
        default: return "Undetermined";
    }
}

Classification classify_point(const WeightedSystem& sys, const RatVec& p,
                              const Rational& probe_radius, int probe_count,
                              uint64_t seed) {
    if (probe_radius <= 0) throw UsageError("probe radius must be positive");
    auto words = enumerate_commutators(sys);
    Classification cls;
    auto base = filtration_dims(sys, words, p);
    cls.dims_at_point = base.dims;

    // generic ranks over the rational function field
    for (int k = 1; k <= sys.depth; ++k) {
        std::vector<std::vector<RPoly>> rows;
        for (const auto& w : words)
            if (w.hdeg <= k && !w.is_zero) rows.push_back(w.field.components());
        cls.generic_dims.push_back(symbolic_rank(std::move(rows)));
    }

    // probe sampling in the Euclidean ball (rational probes, exact ranks)
    CounterRng rng(seed, 17);
    bool probe_mismatch = false;
    for (int i = 0; i < probe_count && !probe_mismatch; ++i) {
        RatVec q = p;
        for (int j = 0; j < sys.dim(); ++j) {
            long num = static_cast<long>(rng.next_bits() % 2049) - 1024;
            q[j] += probe_radius * Rational(num, 1024);
        }
        auto probe = filtration_dims(sys, words, q);
        if (probe.dims != base.dims) probe_mismatch = true;
        cls.probes_used = i + 1;
    }

    bool generic_match = (cls.dims_at_point == cls.generic_dims);
    cls.certified = true;
    if (!generic_match) {
        // some rank sits below its generic value: points of higher rank are
        // dense near p, so the dimensions are not locally constant
        cls.verdict = Regularity::Nonregular;
    } else {
        // pointwise ranks equal the generic ranks; semicontinuity pins the
        // dimensions in a whole neighborhood. A probe mismatch then only means
        // the probe ball is larger than that neighborhood.
        cls.verdict = Regularity::Regular;
    }
    (void)probe_mismatch;
    return cls;
}

AdaptedFrame adapted_frame(const WeightedSystem& sys,
                           const std::vector<CommutatorWord>& words, const RatVec& u) {
    // words arrive in (hdeg, length, lex) order; greedy rank extension over
    // that order minimizes (weight sum, length sum) lexicographically
    RatMat rows;
    std::vector<const CommutatorWord*> index;
    for (const auto& w : words)
        if (!w.is_zero) {
            rows.push_back(w.field.evaluate<Rational>(u));
            index.push_back(&w);
        }
    auto chosen = rat_greedy_independent(rows);
    if (static_cast<int>(chosen.size()) < sys.dim())
        throw StructuralDefect("cannot build an adapted frame: word values span only " +
                               std::to_string(chosen.size()) + " of " +
                               std::to_string(sys.dim()) + " directions at the point");
    AdaptedFrame frame;
    for (int c : chosen) {
        frame.words.push_back(*index[c]);
        frame.frame_weights.push_back(index[c]->hdeg);
        frame.weight_sum += index[c]->hdeg;
        frame.length_sum += static_cast<long>(index[c]->word.size());
    }
    return frame;
}

AdaptedFrame adapted_frame(const WeightedSystem& sys, const RatVec& u) {
    return adapted_frame(sys, enumerate_commutators(sys), u);
}

}  // namespace ccw
