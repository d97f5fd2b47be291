#pragma once

#include "agewake/analytic.hpp"
#include "agewake/types.hpp"

namespace agewake {

/// A sleep plan together with the analytic optimality certificates that come
/// with it: a lower bound on the true optimum, the value achieved by the
/// plan (the upper bound), the leading-order sub-optimality bound, and the
/// common limit of both bounds as ts_ratio -> 0.
struct RegimeSolution {
    SleepPlan plan;
    double gap_constant;  // C1 (adequate) or C2 (scarce)
    double gap_bound;     // 2 sqrt(eps) C1, or eps C2
    double lower_bound;
    double upper_bound;   // objective value at plan.rates, normalized
    double asymptote;
};

/// Optimal collision-free scheduler: per-source channel-time shares and the
/// resulting normalized weighted peak age.
struct SyncSolution {
    Eigen::ArrayXd shares;  // a_l in (0, 1]
    double value;
};

struct TsZeroSolution {
    Eigen::ArrayXd rates;  // empty for the y -> infinity limit
    double objective;
};

struct GridResult {
    Eigen::ArrayXd best_rates;
    double best_objective;
};

/// Residual tolerance for the beta bisection.
inline constexpr double kBetaTol = 1e-12;

/// Solves sum_i min{b_i, beta sqrt(w_i)} = 1 for beta by bisection on
/// [0, max_l b_l / sqrt(w_l)]. Requires sum(b) >= 1; when sum(b) = 1 exactly
/// the root set is a ray and its infimum max_l(b_l / sqrt(w_l)) is returned.
double solve_beta_star(const Eigen::ArrayXd& weights, const Eigen::ArrayXd& efficiencies);

/// Energy-adequate solver (sum b >= 1, ts_ratio > 0):
///   r*_l = min{b_l, beta* sqrt(w_l)} x*,  x* = -1/2 + sqrt(1/4 + 1/eps).
RegimeSolution plan_energy_adequate(const Fleet& fleet);

/// Energy-scarce solver (sum b < 1): r*_l = b_l x* with
///   x* = min_l c_l / (1 - sum b), the c_l feasibility factors collapsing to
///   1 at eps = 0.
RegimeSolution plan_energy_scarce(const Fleet& fleet);

/// Dispatches on sum(b) >= 1 and tags the result with the regime chosen.
RegimeSolution plan(const Fleet& fleet);

/// Inner layer of the nested convex method for ts = 0 at a fixed
/// y = sum(r) + 1 > 1. Rates solve sum_i min{b_i, beta(y) sqrt(w_i)} = 1 - 1/y.
TsZeroSolution plan_ts_zero(const Fleet& fleet, double y);

/// Outer-layer optimum (y -> infinity); rates are unbounded, only the
/// objective limit is returned.
TsZeroSolution plan_ts_zero_limit(const Fleet& fleet);

/// KKT solution of the synchronized-scheduler problem; its value equals the
/// asymptote of plan() in both regimes.
SyncSolution synchronized_optimum(const Eigen::ArrayXd& weights,
                                  const Eigen::ArrayXd& efficiencies);

/// Equal-rate baseline r_l = k with k the largest value keeping every source
/// energy-feasible (found by bisection). If no constraint ever binds, k is
/// capped at plan(fleet).x_star / M so the aggregate wake rate matches the
/// optimal plan.
SleepPlan fixed_rate_baseline(const Fleet& fleet);

/// Exhaustive search over a logarithmic grid of feasible rate vectors,
/// per axis in [1e-3 x*, 10 x*]. Supports M <= 3 only.
GridResult grid_oracle(const Fleet& fleet, int per_axis_points);

}  // namespace agewake
