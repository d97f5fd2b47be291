#include "agewake/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace agewake {

namespace {

// sum_i min{b_i, beta sqrt(w_i)}, the left side of the beta equation.
double min_share_sum(const Eigen::ArrayXd& w, const Eigen::ArrayXd& b, double beta) {
    return b.min(beta * w.sqrt()).sum();
}

// Bisection for sum_i min{b_i, beta sqrt(w_i)} = target on [0, max b/sqrt(w)].
// Requires sum(b) >= target. At sum(b) == target the root set is the ray
// [max b/sqrt(w), inf); the infimum is returned so the result is continuous
// in b.
double solve_beta_for_target(const Eigen::ArrayXd& w, const Eigen::ArrayXd& b, double target) {
    const double sum_b = b.sum();
    if (sum_b < target)
        throw NoRootError("beta equation has no root: sum(b) = " + std::to_string(sum_b) +
                          " < " + std::to_string(target));
    double hi = (b / w.sqrt()).maxCoeff();
    if (min_share_sum(w, b, hi) <= target) return hi;  // sum(b) == target edge
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s = min_share_sum(w, b, mid);
        if (std::abs(s - target) <= kBetaTol) return mid;
        (s < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double adequate_x_star(double eps) {
    return -0.5 + std::sqrt(0.25 + 1.0 / eps);
}

}  // namespace

double solve_beta_star(const Eigen::ArrayXd& weights, const Eigen::ArrayXd& efficiencies) {
    if (weights.size() != efficiencies.size() || weights.size() == 0)
        throw std::domain_error("solve_beta_star: bad input sizes");
    if (!(weights > 0.0).all() || !(efficiencies > 0.0).all())
        throw std::domain_error("solve_beta_star: weights/efficiencies must be > 0");
    return solve_beta_for_target(weights, efficiencies, 1.0);
}

RegimeSolution plan_energy_adequate(const Fleet& fleet) {
    fleet.validate();
    const Eigen::ArrayXd w = fleet.weights();
    const Eigen::ArrayXd b = fleet.efficiencies();
    if (b.sum() < 1.0)
        throw WrongRegimeError("plan_energy_adequate: sum(b) < 1, use plan_energy_scarce");
    if (fleet.ts_ratio == 0.0)
        throw UnboundedRatesError(
            "plan_energy_adequate: ts_ratio = 0 makes x* infinite, use plan_ts_zero");

    const double eps = fleet.ts_ratio;
    const double beta = solve_beta_star(w, b);
    const double x = adequate_x_star(eps);
    const Eigen::ArrayXd shares = b.min(beta * w.sqrt());

    RegimeSolution sol;
    sol.plan.rates = shares * x;
    sol.plan.regime = Regime::EnergyAdequate;
    sol.plan.beta_star = beta;
    sol.plan.x_star = x;
    sol.gap_constant = (w / shares).sum();  // C1
    sol.gap_bound = 2.0 * std::sqrt(eps) * sol.gap_constant;
    sol.lower_bound = (w / shares + w).sum();
    sol.upper_bound = expected_weighted_peak_age(fleet, sol.plan.rates).total;
    sol.asymptote = sol.lower_bound;
    return sol;
}

RegimeSolution plan_energy_scarce(const Fleet& fleet) {
    fleet.validate();
    const Eigen::ArrayXd w = fleet.weights();
    const Eigen::ArrayXd b = fleet.efficiencies();
    const double sum_b = b.sum();
    if (sum_b >= 1.0)
        throw WrongRegimeError("plan_energy_scarce: sum(b) >= 1, use plan_energy_adequate");

    const double eps = fleet.ts_ratio;
    const double gap = 1.0 - sum_b;
    // Feasibility factors: c_l = 2 b_l gap^2 / Q_l, collapsing to 1 at eps = 0.
    const Eigen::ArrayXd q =
        b * gap * gap +
        (b.square() * std::pow(gap, 4) + 4.0 * b.square() * gap * gap * (sum_b - b) * eps).sqrt();
    const Eigen::ArrayXd c = 2.0 * b * gap * gap / q;
    const double x = c.minCoeff() / gap;

    RegimeSolution sol;
    sol.plan.rates = b * x;  // min{b_l, beta* sqrt(w_l)} = b_l in this regime
    sol.plan.regime = Regime::EnergyScarce;
    sol.plan.beta_star = (1.0 / w.sqrt()).sum();
    sol.plan.x_star = x;
    const double z = sum_b / gap;
    sol.gap_constant = (w / (b * gap)).sum() * (3.0 * sum_b - b.minCoeff());  // C2
    sol.gap_bound = eps * sol.gap_constant;
    sol.lower_bound = ((w / b) * std::exp(-z * eps)).sum() + w.sum();
    sol.upper_bound = expected_weighted_peak_age(fleet, sol.plan.rates).total;
    sol.asymptote = (w / b + w).sum();
    return sol;
}

RegimeSolution plan(const Fleet& fleet) {
    fleet.validate();
    return fleet.efficiencies().sum() >= 1.0 ? plan_energy_adequate(fleet)
                                             : plan_energy_scarce(fleet);
}

TsZeroSolution plan_ts_zero(const Fleet& fleet, double y) {
    fleet.validate();
    if (!(y > 1.0)) throw std::domain_error("plan_ts_zero: y must be > 1");
    const Eigen::ArrayXd w = fleet.weights();
    const Eigen::ArrayXd b = fleet.efficiencies();
    const double beta_y = solve_beta_for_target(w, b, 1.0 - 1.0 / y);
    const Eigen::ArrayXd shares = b.min(beta_y * w.sqrt());
    TsZeroSolution out;
    out.rates = shares * y;
    out.objective = (w / shares + w).sum();
    return out;
}

TsZeroSolution plan_ts_zero_limit(const Fleet& fleet) {
    fleet.validate();
    const Eigen::ArrayXd w = fleet.weights();
    const Eigen::ArrayXd b = fleet.efficiencies();
    const Eigen::ArrayXd shares =
        b.sum() >= 1.0 ? Eigen::ArrayXd(b.min(solve_beta_star(w, b) * w.sqrt()))
                       : Eigen::ArrayXd(b);
    TsZeroSolution out;
    out.objective = (w / shares + w).sum();
    return out;
}

SyncSolution synchronized_optimum(const Eigen::ArrayXd& weights,
                                  const Eigen::ArrayXd& efficiencies) {
    if (weights.size() != efficiencies.size() || weights.size() == 0)
        throw std::domain_error("synchronized_optimum: bad input sizes");
    SyncSolution out;
    if (efficiencies.sum() >= 1.0) {
        const double beta = solve_beta_star(weights, efficiencies);
        out.shares = efficiencies.min(beta * weights.sqrt()).min(1.0);
    } else {
        out.shares = efficiencies;
    }
    out.value = (weights / out.shares + weights).sum();
    return out;
}

SleepPlan fixed_rate_baseline(const Fleet& fleet) {
    fleet.validate();
    const int m = fleet.size();
    const Eigen::ArrayXd b = fleet.efficiencies();

    // Strict comparison: the bisection converges onto this boundary, so any
    // tolerance here would put the returned rates epsilon outside the shared
    // feasibility tolerance.
    auto feasible_at = [&](double k) {
        const Eigen::ArrayXd rates = Eigen::ArrayXd::Constant(m, k);
        return (transmit_fractions(rates, fleet.ts_ratio) <= b).all();
    };

    // Rates beyond this never arise from the solvers; feasibility at k_max is
    // treated as "no constraint binds". Keep sum(rates) * ts_ratio inside the
    // safe exponent range so the probe itself cannot overflow.
    double k_max = 1e6;
    if (fleet.ts_ratio > 0.0)
        k_max = std::min(k_max, 0.5 * kExpArgLimit / (m * fleet.ts_ratio));
    double k;
    if (feasible_at(k_max)) {
        // No binding constraint: match the aggregate wake rate of the optimal
        // plan so the comparison isolates rate shaping, not total activity.
        // With ts_ratio = 0 in the adequate regime that rate is unbounded;
        // k = 1 is the reference point then.
        try {
            k = plan(fleet).plan.x_star / m;
        } catch (const UnboundedRatesError&) {
            k = 1.0;
        }
    } else {
        double lo = 0.0, hi = k_max;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (feasible_at(mid) ? lo : hi) = mid;
        }
        k = lo;
    }

    SleepPlan out;
    out.rates = Eigen::ArrayXd::Constant(m, k);
    out.regime = b.sum() >= 1.0 ? Regime::EnergyAdequate : Regime::EnergyScarce;
    out.beta_star = 0.0;
    out.x_star = k * m;
    return out;
}

GridResult grid_oracle(const Fleet& fleet, int per_axis_points) {
    fleet.validate();
    const int m = fleet.size();
    if (m > 3) throw std::domain_error("grid_oracle: only M <= 3 supported");
    if (per_axis_points < 2) throw std::domain_error("grid_oracle: need >= 2 points per axis");

    const RegimeSolution ref = plan(fleet);
    const double x_star = ref.plan.x_star;
    const double lo = std::log(1e-3 * x_star);
    const double hi = std::log(10.0 * x_star);
    const int n = per_axis_points;

    auto axis_value = [&](int i) { return std::exp(lo + (hi - lo) * i / (n - 1)); };

    GridResult best;
    best.best_objective = std::numeric_limits<double>::infinity();
    Eigen::ArrayXd rates(m);
    std::vector<int> idx(m, 0);
    const long total = static_cast<long>(std::pow(static_cast<double>(n), m));
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int d = 0; d < m; ++d) {
            idx[d] = static_cast<int>(rem % n);
            rem /= n;
        }
        for (int d = 0; d < m; ++d) rates[d] = axis_value(idx[d]);
        if (!energy_feasible(fleet, rates).feasible) continue;
        const double obj = expected_weighted_peak_age(fleet, rates).total;
        if (obj < best.best_objective ||
            (obj == best.best_objective && best.best_rates.size() > 0 &&
             std::lexicographical_compare(rates.begin(), rates.end(),
                                          best.best_rates.begin(), best.best_rates.end()))) {
            best.best_objective = obj;
            best.best_rates = rates;
        }
    }
    if (!std::isfinite(best.best_objective))
        throw std::domain_error("grid_oracle: no feasible grid point");
    return best;
}

}  // namespace agewake
