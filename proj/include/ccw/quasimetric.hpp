#pragma once

#include <optional>
#include <vector>

#include "ccw/freelift.hpp"
#include "ccw/grading.hpp"

namespace ccw {

struct RhoConfig {
    double endpoint_tol = 1e-10;
    double bisect_rel_gap = 1e-4;
    int multistart = 8;
    int max_iter = 120;
    uint64_t seed = 1;
    FlowConfig flow;
};

enum class RhoStatus { Converged, Stalled, Infeasible };

std::string to_string(RhoStatus s);

struct QuasimetricEstimate {
    double value = 0.0;
    std::vector<double> controls;  // w_I per context word, certificate witness
    double endpoint_residual = 0.0;
    RhoStatus status = RhoStatus::Stalled;
    double bisect_gap = 0.0;  // relative bracket width at exit
};

/// Control index set for the rho solver: nonzero expanded words, one
/// representative per sign-proportionality class (literally identical
/// directions are not double-counted). Holds the exact symbolic endpoint map
/// when the combination series terminates; flows otherwise.
class MetricContext {
public:
    static MetricContext for_system(const WeightedSystem& sys, const FlowConfig& cfg = {});
    /// rho^u over the privileged chart coordinates: hat fields, anchor 0.
    static MetricContext for_approximation(const NilpotentApproximation& na,
                                           const FlowConfig& cfg = {});
    /// Arbitrary field family (used for lifted systems and tests).
    static MetricContext for_fields(const Chart& chart, std::vector<Word> words,
                                    std::vector<int> hdegs, std::vector<RField> fields,
                                    const RatVec& base, int depth,
                                    const FlowConfig& cfg = {});

    int control_dim() const { return static_cast<int>(fields_.size()); }
    const std::vector<Word>& words() const { return words_; }
    const std::vector<int>& hdegs() const { return hdegs_; }
    const std::vector<RField>& fields() const { return fields_; }
    const std::vector<int>& frame_controls() const { return frame_controls_; }
    const std::vector<double>& base_point() const { return base_; }
    int depth() const { return depth_; }
    bool symbolic() const { return symbolic_.has_value(); }
    const FlowConfig& flow_config() const { return flow_cfg_; }

    std::vector<double> endpoint(const std::vector<double>& p,
                                 const std::vector<double>& controls) const;
    std::vector<std::vector<double>> control_jacobian(const std::vector<double>& p,
                                                      const std::vector<double>& controls) const;
    /// Independent certificate recheck through the numeric integrator.
    std::vector<double> endpoint_numeric(const std::vector<double>& p,
                                         const std::vector<double>& controls) const;

private:
    std::vector<Word> words_;
    std::vector<int> hdegs_;
    std::vector<RField> fields_;
    std::vector<DField> dfields_;
    std::vector<int> frame_controls_;
    std::vector<double> base_;
    int depth_ = 0;
    std::optional<SymbolicEndpoint> symbolic_;
    FlowConfig flow_cfg_;
};

/// Upper-bound estimate of rho(v, w): bisection over delta with an inner
/// feasibility solve on scaled controls |s_I| <= 1, w_I = delta^{|I|_h} s_I.
QuasimetricEstimate rho_estimate(const MetricContext& ctx, const std::vector<double>& v,
                                 const std::vector<double>& w, const RhoConfig& cfg = {});

QuasimetricEstimate rho_estimate(const WeightedSystem& sys, const std::vector<double>& v,
                                 const std::vector<double>& w, const RhoConfig& cfg = {});

/// rho^u between manifold points: chart-inverts both and solves on the chart.
QuasimetricEstimate rho_u_estimate(const NilpotentApproximation& na,
                                   const std::vector<double>& v,
                                   const std::vector<double>& w, const RhoConfig& cfg = {});

struct BallSample {
    std::vector<std::vector<double>> points;
    std::vector<std::vector<double>> controls;  // the admissible draws, |w_I| <= r^{|I|_h}
    int failures = 0;
};

/// n endpoints of exp(sum w_I X_I) with controls uniform in scaled coordinates;
/// every sample carries its delta <= r certificate by construction.
BallSample ball_sample(const MetricContext& ctx, const std::vector<double>& center,
                       double r, int n, uint64_t seed, const FlowConfig& cfg = {});

struct QuasimetricDiagnostics {
    double symmetry_defect = 0.0;
    double triangle_q = 0.0;
    double cone_defect = 0.0;
    int samples_used = 0;
    int failures = 0;
};

/// Empirical generalized-triangle constant and symmetry defect at one scale:
/// u near center, v and w in the rho-ball of radius `scale` around u.
QuasimetricDiagnostics triangle_constant(const MetricContext& ctx,
                                         const std::vector<double>& center, int samples,
                                         double scale, uint64_t seed,
                                         const RhoConfig& cfg = {});

/// Max relative violation of rho^u(dil_eps v, dil_eps w) = eps rho^u(v, w)
/// over sampled pairs and the given eps grid, on the chart.
QuasimetricDiagnostics cone_check(const NilpotentApproximation& na, int pairs,
                                  const std::vector<double>& eps_list, uint64_t seed,
                                  const RhoConfig& cfg = {});

struct BoxInclusionReport {
    double r = 0.0;
    double xi = 0.0;
    double required_radius = 0.0;  // smallest R with all second-hop samples in B(v,R)
    int samples = 0;
    int failures = 0;
};

/// Samples x in B(v,r) and y in B(x,xi), reporting the smallest inflation R
/// with every y inside B(v,R).
BoxInclusionReport box_inclusion_check(const MetricContext& ctx,
                                       const std::vector<double>& v, double r, double xi,
                                       int n, uint64_t seed, const RhoConfig& cfg = {});

}  // namespace ccw
