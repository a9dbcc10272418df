#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccw/exact_linalg.hpp"
#include "ccw/vec_field.hpp"

namespace ccw {

// Right-nested bracket word over generator indices: (i1,...,ik) stands for
// [X_{i1}, [X_{i2}, [..., X_{ik}]...]]; a singleton is the generator itself.
using Word = std::vector<int>;

std::string word_to_string(const Word& w);

struct CommutatorWord {
    Word word;
    int hdeg = 0;       // sum of generator weights along the word
    RField field;       // exactly expanded bracket
    bool is_zero = false;
};

/// Generating data of a weighted space: fields X_1..X_q with weights
/// d_1 <= ... <= d_q and depth M on a coordinate chart, plus the anchor point
/// used for validation and as the default base point.
struct WeightedSystem {
    std::string name;
    Chart chart;
    std::vector<RField> generators;
    std::vector<int> weights;
    int depth = 0;
    RatVec anchor;

    int dim() const { return chart.dim(); }
    int q() const { return static_cast<int>(generators.size()); }
    std::vector<double> anchor_d() const {
        std::vector<double> p;
        p.reserve(anchor.size());
        for (const auto& r : anchor) p.push_back(to_double(r));
        return p;
    }
};

/// All right-nested words with hdeg <= depth in (hdeg, length, lex) order,
/// each with its exactly expanded field; identically-zero fields are retained
/// but flagged.
std::vector<CommutatorWord> enumerate_commutators(const WeightedSystem& sys);

/// Minimal k with rank{X_I(p) : |I|_h <= k} = N, or nullopt if never full
/// within max_depth.
std::optional<int> minimal_depth_at(const WeightedSystem& sys, const RatVec& p,
                                    int max_depth);

/// Checks the WeightedSystem invariants: weights sorted, full span at the
/// anchor, depth minimal there. Throws StructuralDefect / UsageError.
void validate_system(const WeightedSystem& sys);

struct FiltrationSnapshot {
    RatVec point;
    std::vector<int> dims;                   // n_1 <= ... <= n_M
    std::vector<std::vector<Word>> witnesses;  // per k, words realizing the rank
};

FiltrationSnapshot filtration_dims(const WeightedSystem& sys, const RatVec& p);
FiltrationSnapshot filtration_dims(const WeightedSystem& sys,
                                   const std::vector<CommutatorWord>& words,
                                   const RatVec& p);

/// Floating-point variant for irrational points: ranks via SVD with threshold
/// 1e-9 * sigma_max.
std::vector<int> filtration_dims_numeric(const WeightedSystem& sys,
                                         const std::vector<double>& p);

enum class Regularity { Regular, Nonregular, Undetermined };

std::string to_string(Regularity r);

struct Classification {
    Regularity verdict = Regularity::Undetermined;
    std::vector<int> dims_at_point;
    std::vector<int> generic_dims;  // symbolic (generic) filtration ranks
    bool certified = false;         // decided by the exact minor certificate
    int probes_used = 0;
};

/// Regular / nonregular classification. For rational points this is decided
/// exactly: the pointwise filtration ranks are compared against the generic
/// symbolic ranks (rank is lower-semicontinuous, and a not-identically-zero
/// minor vanishing at p certifies nearby points of higher rank). Probe
/// sampling in the Euclidean ball backs the certificate and is the only
/// mechanism for non-rational points.
Classification classify_point(const WeightedSystem& sys, const RatVec& p,
                              const Rational& probe_radius = Rational(1, 100),
                              int probe_count = 64, uint64_t seed = 0);

struct AdaptedFrame {
    std::vector<CommutatorWord> words;  // Y_1..Y_N, ascending degree
    std::vector<int> frame_weights;     // deg Y_i
    long weight_sum = 0;
    long length_sum = 0;
};

/// Frame associated with the filtration at u: independent at u, prefix spans
/// H_k(u), minimal total weight then minimal total word length. Ties broken
/// deterministically by (hdeg, word length, word lex); greedy selection over
/// that order realizes the lexicographic minimum (matroid greedy).
AdaptedFrame adapted_frame(const WeightedSystem& sys, const RatVec& u);
AdaptedFrame adapted_frame(const WeightedSystem& sys,
                           const std::vector<CommutatorWord>& words, const RatVec& u);

/// Values of the words at a rational point, one row per word.
RatMat word_values(const std::vector<CommutatorWord>& words, const RatVec& p);

}  // namespace ccw
