#pragma once

#include "agewake/types.hpp"

namespace agewake {

/// Floating-point slack applied to the energy constraint sigma_l <= b_l.
inline constexpr double kFeasibilityTol = 1e-12;

/// Inputs with sum(r) * ts_ratio beyond this are rejected instead of
/// returning infinities from exp().
inline constexpr double kExpArgLimit = 700.0;

/// Per-cycle channel-access probability of each source,
///   alpha_l = r_l e^{r_l eps} / (e^{sum(r) eps} sum(r)).
/// sum(alpha) = 1 when eps = 0; for eps > 0 the deficit 1 - sum(alpha) is the
/// per-cycle collision probability.
Eigen::ArrayXd access_probabilities(const Eigen::ArrayXd& rates, double ts_ratio);

struct PeakAge {
    Eigen::ArrayXd per_source;  // normalized (units of E[T])
    double total;               // sum of w_l * per_source[l], normalized
    double total_seconds;       // total * E[T]
};

/// Expected weighted average peak age for the given rates. Per source, in
/// units of E[T]:
///   (e^{-r_l eps} / r_l) e^{sum(r) eps} (1 + sum(r)) + 1.
PeakAge expected_weighted_peak_age(const Fleet& fleet, const Eigen::ArrayXd& rates);

/// Fraction of time each source spends in transmission mode,
///   sigma_l = ([1 - e^{-r_l eps}] sum(r) + r_l e^{-r_l eps}) / (sum(r) + 1).
Eigen::ArrayXd transmit_fractions(const Eigen::ArrayXd& rates, double ts_ratio);

struct Feasibility {
    bool feasible;
    Eigen::ArrayXd slack;  // b_l - sigma_l per source
};

/// Checks sigma_l <= b_l + kFeasibilityTol for every source.
Feasibility energy_feasible(const Fleet& fleet, const Eigen::ArrayXd& rates);

/// b = (B/D + R) / P_avg from the battery budget.
double power_efficiency_from_battery(const BatterySpec& spec);

}  // namespace agewake
