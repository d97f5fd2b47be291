#include "agewake/analytic.hpp"

#include <cmath>
#include <string>

namespace agewake {

namespace {

void check_rates(const Eigen::ArrayXd& rates, double ts_ratio) {
    if (rates.size() == 0) throw std::domain_error("rates: empty vector");
    if (!(ts_ratio >= 0.0)) throw std::domain_error("ts_ratio must be >= 0");
    if (!(rates > 0.0).all()) throw std::domain_error("rates: all entries must be > 0");
    const double arg = rates.sum() * ts_ratio;
    if (arg > kExpArgLimit)
        throw std::domain_error("exp overflow: sum(r) * ts_ratio = " + std::to_string(arg));
}

}  // namespace

Eigen::ArrayXd access_probabilities(const Eigen::ArrayXd& rates, double ts_ratio) {
    check_rates(rates, ts_ratio);
    const double sum_r = rates.sum();
    return rates * (rates * ts_ratio).exp() / (std::exp(sum_r * ts_ratio) * sum_r);
}

PeakAge expected_weighted_peak_age(const Fleet& fleet, const Eigen::ArrayXd& rates) {
    fleet.validate();
    if (rates.size() != fleet.size())
        throw std::domain_error("expected_weighted_peak_age: rates size mismatch");
    check_rates(rates, fleet.ts_ratio);
    const double eps = fleet.ts_ratio;
    const double sum_r = rates.sum();
    PeakAge out;
    out.per_source =
        (-rates * eps).exp() / rates * std::exp(sum_r * eps) * (1.0 + sum_r) + 1.0;
    out.total = (fleet.weights() * out.per_source).sum();
    out.total_seconds = out.total * fleet.mean_tx_time;
    return out;
}

Eigen::ArrayXd transmit_fractions(const Eigen::ArrayXd& rates, double ts_ratio) {
    check_rates(rates, ts_ratio);
    const double sum_r = rates.sum();
    const Eigen::ArrayXd decay = (-rates * ts_ratio).exp();
    return ((1.0 - decay) * sum_r + rates * decay) / (sum_r + 1.0);
}

Feasibility energy_feasible(const Fleet& fleet, const Eigen::ArrayXd& rates) {
    fleet.validate();
    if (rates.size() != fleet.size())
        throw std::domain_error("energy_feasible: rates size mismatch");
    const Eigen::ArrayXd sigma = transmit_fractions(rates, fleet.ts_ratio);
    Feasibility out;
    out.slack = fleet.efficiencies() - sigma;
    out.feasible = (out.slack >= -kFeasibilityTol).all();
    return out;
}

double power_efficiency_from_battery(const BatterySpec& spec) {
    if (!(spec.target_lifetime > 0.0))
        throw std::domain_error("battery: target_lifetime must be > 0");
    if (!(spec.initial_energy > 0.0))
        throw std::domain_error("battery: initial_energy must be > 0");
    if (!(spec.replenish_rate >= 0.0))
        throw std::domain_error("battery: replenish_rate must be >= 0");
    if (!(spec.avg_tx_power > 0.0))
        throw std::domain_error("battery: avg_tx_power must be > 0");
    return (spec.initial_energy / spec.target_lifetime + spec.replenish_rate) / spec.avg_tx_power;
}

}  // namespace agewake
