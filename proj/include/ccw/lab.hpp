#pragma once

#include <string>
#include <vector>

#include "ccw/parallel.hpp"
#include "ccw/quasimetric.hpp"

namespace ccw {

struct ExperimentConfig {
    std::vector<double> eps_grid;  // strictly decreasing, positive
    int anchors_per_eps = 16;
    int tuples_per_anchor = 64;
    int pairs_per_eps = 32;
    int box_points = 64;  // evaluation points for field-norm experiments
    uint64_t seed = 12345;
    RhoConfig rho;
    ExecMode exec = default_exec_mode();
    double zero_floor = 1e-6;

    static std::vector<double> default_grid() {
        std::vector<double> g;
        for (int k = 3; k <= 9; ++k) g.push_back(std::pow(2.0, -k));
        return g;
    }
    ExperimentConfig() : eps_grid(default_grid()) {
        rho.bisect_rel_gap = 1e-5;
        rho.endpoint_tol = 1e-11;
    }
};

enum class Verdict { Pass, PassZero, Fail, Inconclusive };

std::string to_string(Verdict v);

struct ConvergenceReport {
    std::string experiment;
    std::string space;
    std::vector<double> eps;  // grid column (lambda for the rescale experiment)
    std::vector<double> value;
    std::vector<int> n_samples;
    std::vector<int> n_failures;
    uint64_t seed = 0;

    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    bool fit_valid = false;
    double expected_slope = 0.0;
    bool slope_upper_bound = false;  // pass when slope <= expected (decreasing fits)
    Verdict verdict = Verdict::Inconclusive;
    std::string note;
};

/// Theoretical rate 1 + d_1/max{d_q, M} for the system (the general-weights
/// form of the 1 + 1/M exponent).
double theoretical_rate(const WeightedSystem& sys);

/// Sampled divergence of integral lines: matching control tuples flown along
/// the original fields and their nilpotentizations, measured in both metrics.
ConvergenceReport divergence_experiment(const WeightedSystem& sys, const RatVec& u,
                                        const ExperimentConfig& cfg);

/// |rho(v,w) - rho^u(v,w)| over pairs at scale eps around u.
ConvergenceReport local_approx_experiment(const WeightedSystem& sys, const RatVec& u,
                                          const ExperimentConfig& cfg);

/// Rescaling distortion dis(lambda) = max |lambda rho(dil_{1/lambda} v,
/// dil_{1/lambda} w) - rho^u(v, w)| over pairs in the unit box; the grid
/// column holds lambda = 1/eps.
ConvergenceReport cone_rescale_experiment(const WeightedSystem& sys, const RatVec& u,
                                          const ExperimentConfig& cfg);

/// Sup-norm deviation of the rescaled pushforward fields from the hat fields
/// on the unit box per eps.
ConvergenceReport gromov_convergence_experiment(const WeightedSystem& sys, const RatVec& u,
                                                const ExperimentConfig& cfg);

/// CSV (header epsilon,value,n_samples,n_failures,seed; floats at 17
/// significant digits) plus a standalone SVG log-log plot with the fitted
/// line. Deterministic bytes for identical inputs. Throws on an empty grid
/// before touching the filesystem.
void emit_report(const ConvergenceReport& report, const std::string& csv_path,
                 const std::string& svg_path);

std::string render_csv(const ConvergenceReport& report);
std::string render_svg(const ConvergenceReport& report);

/// Least-squares log-log fit over rows with value > floor; populates slope,
/// r2 and the verdict against expected_slope.
void fit_and_judge(ConvergenceReport& report, double zero_floor);

}  // namespace ccw
