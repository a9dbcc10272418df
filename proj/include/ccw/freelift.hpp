#pragma once

#include <map>
#include <string>
#include <vector>

#include "ccw/grading.hpp"

namespace ccw {

using SparseRat = std::map<int, Rational>;

struct HallElement {
    int left = -1, right = -1;  // presentation indices of the children
    int gen = -1;               // generator index for leaves
    int hdeg = 0;
    int len = 0;
    int internal_rank = 0;  // order the Hall condition is stated against
    std::string repr;
};

/// Weighted Hall basis of the free nilpotent Lie algebra with q generators of
/// weights d_1..d_q and depth M: the classical Hall family restricted to
/// hdeg <= M, presented in (hdeg, word length, lexicographic) order.
class HallBasis {
public:
    static HallBasis build(int q, std::vector<int> gen_weights, int M);

    int q() const { return q_; }
    int depth() const { return M_; }
    const std::vector<int>& gen_weights() const { return gen_weights_; }
    int dim() const { return static_cast<int>(elems_.size()); }
    const std::vector<HallElement>& elements() const { return elems_; }
    int generator_index(int gen) const { return gen_pos_[gen]; }

    /// Hall coordinates of the bracket [a, b] of two basis elements
    /// (presentation indices), in the depth-M quotient.
    const SparseRat& reduce_pair(int a, int b) const;

    /// Hall coordinates of a right-nested bracket word over generators.
    SparseRat word_coords(const Word& w) const;

    /// Free structure constants over the presentation basis.
    StructureConstants structure_constants() const;

private:
    int q_ = 0;
    std::vector<int> gen_weights_;
    int M_ = 0;
    std::vector<HallElement> elems_;
    std::vector<int> gen_pos_;
    std::map<std::pair<int, int>, int> pair_index_;
    mutable std::map<std::pair<int, int>, SparseRat> reduce_cache_;
};

/// Canonical polynomial realization of the free nilpotent algebra on R^dim
/// in exponential coordinates: field_j(0) = e_j, brackets reproduce the free
/// structure constants exactly, and field_j is homogeneous of order -hdeg_j.
struct FreeRealization {
    HallBasis basis;
    StructureConstants constants;
    Chart chart;
    std::vector<RField> fields;
};

FreeRealization free_realization(const HallBasis& basis);

/// Lifting of a weighted system to one that is free up to order M on the
/// extended space R^{N~}: the base block of each lifted generator is the
/// pushforward X'_k on the privileged chart, the z-tails come from the free
/// group written in mixed second-kind coordinates, and the same tails are
/// attached to the hat fields.
struct LiftedSystem {
    WeightedSystem base;
    NilpotentApproximation na;
    HallBasis hall;
    StructureConstants free_constants;

    WeightedSystem lifted;            // generators = tilde X_k on the (x, z) chart
    std::vector<RField> lifted_hat;   // tilde hat X_k
    std::vector<int> coord_weights;   // dilation exponents per lifted coordinate
    std::vector<SparseRat> frame_free;  // frame words in Hall coordinates
    std::vector<SparseRat> z_basis;     // homogeneous basis of the isotropy algebra
    std::vector<int> z_degrees;
};

LiftedSystem lift_system(const WeightedSystem& sys, const RatVec& u,
                         const FlowConfig& cfg = {});

/// Canonical projection: drops the z block.
std::vector<double> project(const LiftedSystem& ls, const std::vector<double>& p_ext);
RatVec project(const LiftedSystem& ls, const RatVec& p_ext);

/// Inverse of a unipotent polynomial map (id + weighted-higher-order terms);
/// exact, used for moving group tails between chart conventions.
std::vector<RPoly> invert_unipotent(const std::vector<RPoly>& f,
                                    const std::vector<int>& weights);

}  // namespace ccw
