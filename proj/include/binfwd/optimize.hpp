#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "binfwd/rates.hpp"

namespace binfwd {

enum class ConstraintKind { none, sdrc_slack, mac_slack, ptp_budget };

// One conditional factor of the decision, flattened to rows x cols
// (rows = product of conditioning sizes, cols = product of target sizes).
struct FactorShape {
    std::string name;
    std::size_t rows = 1, cols = 1;
};

struct DecisionSpace {
    std::vector<FactorShape> factors;
    ConstraintKind constraint = ConstraintKind::none;
    int u_size = 1;

    // factor whose leading target block is the auxiliary variable; iterates
    // that end marginally infeasible are repaired by mixing its U-marginal
    // toward the state-average (independence is always feasible)
    int coupling_factor = -1;
    std::size_t coupling_cols = 0;  // |U| within that factor's columns

    std::size_t free_params() const;
};

// kernels[i] is row-major rows x cols for factors[i]
using Kernels = std::vector<std::vector<double>>;

struct ObjectiveEval {
    std::vector<double> branches;  // the min over these is the objective
    double slack = 0;              // feasibility margin (>= -1e-9 feasible)

    double value() const;
    int active_branch() const;  // ties break toward the last (binning) branch
};

using Objective = std::function<ObjectiveEval(const Kernels&)>;

struct MaximizeOptions {
    int restarts = 64;
    int grid_levels = 0;  // 0 disables the exhaustive grid pass
    std::uint64_t seed = 1;
    double tol = 1e-9;
    int max_iters = 2000;
    int threads = 1;
};

struct RestartSummary {
    int restart = 0;
    double final_value = 0;
    double slack = 0;
    int iters = 0;
    bool feasible = false;
};

struct OptReport {
    double best_value = 0;
    Kernels argmax;
    double feasibility_margin = 0;
    bool any_feasible = false;
    int restarts_used = 0;
    std::vector<RestartSummary> trajectories;
    bool grid_ran = false;
    double grid_value = 0;
    double sandwich_gap = 0;  // grid_value - best_value when the grid ran
};

// Multi-start projected-subgradient ascent on the min-objective with an
// exact penalty on negative slack, plus an optional exhaustive simplex-grid
// pass for small spaces. Deterministic in (seed, options).
OptReport maximize(const DecisionSpace& space, const Objective& objective,
                   const MaximizeOptions& opts);

// ---- spaces and objectives for the concrete models -------------------------

DecisionSpace make_sdrc_space(const SdRcSpec& spec, int u_size, SdRcDecision::Mode mode);
SdRcDecision kernels_to_sdrc_decision(const SdRcSpec& spec, int u_size, SdRcDecision::Mode mode,
                                      const Kernels& k);
Objective make_sdrc_objective(const SdRcSpec& spec, int u_size, SdRcDecision::Mode mode);

DecisionSpace make_mac_space(const MacSpec& spec, int u_size, MacDecision::Cribbing mode);
MacDecision kernels_to_mac_decision(const MacSpec& spec, int u_size, MacDecision::Cribbing mode,
                                    const Kernels& k);
// weighted support of the rate region: max { w1 r1 + w2 r2 } over the
// four-bound polytope of the decision (inner LP solved in closed form)
Objective make_mac_objective(const MacSpec& spec, int u_size, MacDecision::Cribbing mode,
                             double w1, double w2);
RatePoint mac_support_point(const MacRateBounds& b, double w1, double w2);

DecisionSpace make_ptp_se_space(const PtpSeSpec& spec, int u_size);
Objective make_ptp_se_objective(const PtpSeSpec& spec, int u_size);
PtpSeValue kernels_to_ptp_se_value(const PtpSeSpec& spec, int u_size, const Kernels& k);

struct TracedPoint {
    double w1 = 0, w2 = 0;
    RatePoint point;
    double support = 0;
    double slack = 0;
};

std::vector<TracedPoint> trace_region(const MacSpec& spec, int u_size, MacDecision::Cribbing mode,
                                      const std::vector<std::pair<double, double>>& weights,
                                      const MaximizeOptions& opts);

// Alternative sweep: maximize r1 subject to r2 >= tau over a grid of levels
// tau between 0 and the best attainable r2.
std::vector<TracedPoint> trace_region_r2_grid(const MacSpec& spec, int u_size,
                                              MacDecision::Cribbing mode, int levels,
                                              const MaximizeOptions& opts);

}  // namespace binfwd
