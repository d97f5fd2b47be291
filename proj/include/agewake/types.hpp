#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace agewake {

/// Thrown when the beta equation has no root (energy-scarce fleet passed to
/// the energy-adequate solver path).
struct NoRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when ts_ratio = 0 makes the energy-adequate rates unbounded.
struct UnboundedRatesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a regime-specific solver is called on a fleet in the other
/// regime.
struct WrongRegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SourceParams {
    double weight = 1.0;            // w_l > 0, dimensionless priority
    double power_efficiency = 1.0;  // b_l = P_max / P_avg > 0
};

/// The inputs of the scheduling problem: per-source (w_l, b_l) plus the
/// global channel parameters. All planner outputs depend on (ts_ratio,
/// sources) only; mean_tx_time just converts normalized results to seconds.
struct Fleet {
    std::vector<SourceParams> sources;
    double ts_ratio = 0.0;      // epsilon = t_s / E[T]
    double mean_tx_time = 1.0;  // E[T], seconds

    int size() const { return static_cast<int>(sources.size()); }

    Eigen::ArrayXd weights() const {
        Eigen::ArrayXd w(size());
        for (int i = 0; i < size(); ++i) w[i] = sources[i].weight;
        return w;
    }

    Eigen::ArrayXd efficiencies() const {
        Eigen::ArrayXd b(size());
        for (int i = 0; i < size(); ++i) b[i] = sources[i].power_efficiency;
        return b;
    }

    double sensing_time() const { return ts_ratio * mean_tx_time; }

    void validate() const {
        if (sources.empty()) throw std::invalid_argument("fleet: needs at least one source");
        if (!(ts_ratio >= 0.0)) throw std::invalid_argument("fleet: ts_ratio must be >= 0");
        if (!(mean_tx_time > 0.0)) throw std::invalid_argument("fleet: mean_tx_time must be > 0");
        for (size_t i = 0; i < sources.size(); ++i) {
            if (!(sources[i].weight > 0.0))
                throw std::invalid_argument("fleet: nonpositive weight at source " + std::to_string(i));
            if (!(sources[i].power_efficiency > 0.0))
                throw std::invalid_argument("fleet: nonpositive power efficiency at source " +
                                            std::to_string(i));
        }
    }
};

inline Fleet make_fleet(const Eigen::ArrayXd& weights, const Eigen::ArrayXd& efficiencies,
                        double ts_ratio, double mean_tx_time = 1.0) {
    if (weights.size() != efficiencies.size())
        throw std::invalid_argument("make_fleet: weights/efficiencies size mismatch");
    Fleet f;
    f.sources.resize(weights.size());
    for (int i = 0; i < weights.size(); ++i) f.sources[i] = {weights[i], efficiencies[i]};
    f.ts_ratio = ts_ratio;
    f.mean_tx_time = mean_tx_time;
    f.validate();
    return f;
}

enum class Regime { EnergyAdequate, EnergyScarce };

/// The r vector of normalized sleep-period parameters; the actual mean sleep
/// duration of source l is E[T] / rates[l]. beta_star and x_star are the two
/// scalars an access point would broadcast so that each source can recover
/// its own rate.
struct SleepPlan {
    Eigen::ArrayXd rates;
    Regime regime = Regime::EnergyAdequate;
    double beta_star = 0.0;
    double x_star = 0.0;
};

/// Battery budget that determines a source's target power efficiency.
struct BatterySpec {
    double initial_energy;   // B, joules
    double target_lifetime;  // D, seconds
    double replenish_rate;   // R, watts (0 if no harvesting)
    double avg_tx_power;     // P_avg, watts while transmitting
};

}  // namespace agewake
