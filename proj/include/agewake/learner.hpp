#pragma once

#include "agewake/planner.hpp"
#include "agewake/simulator.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace agewake {

/// Running mean of observed service times. Only successful (non-collision)
/// deliveries feed it; collision durations are never attributable to a
/// single source and are discarded.
class ThetaEstimator {
  public:
    void observe(double service_time_s) {
        sum_service_ += service_time_s;
        ++n_samples_;
    }

    double sum_service() const { return sum_service_; }
    long n_samples() const { return n_samples_; }
    double current_estimate() const { return sum_service_ / std::max(n_samples_, 1L); }

  private:
    double sum_service_ = 0;
    long n_samples_ = 0;
};

struct LearnConfig {
    TxTimeDist true_dist = TxTimeDist::deterministic(1.0);
    Eigen::ArrayXd weights;
    Eigen::ArrayXd efficiencies;
    double sensing_time = 0;  // seconds (the mean service time is unknown)
    long horizon = 0;         // H, number of sampled steps
    std::optional<double> theta_init;  // seconds; default 0.5 * T_max
    double gamma = 4.0;                // diagnostic confidence parameter
    std::uint64_t seed = 0;
    // When set, the estimator is ignored and every episode plans at this
    // value of theta. Pinning the true mean yields the oracle policy run
    // through the identical pipeline.
    std::optional<double> pinned_theta;

    void validate() const;
};

struct Episode {
    long start_index;    // tau_k = 2^k
    double theta_used;   // seconds
    SleepPlan plan_used;
};

struct LearnTrace {
    std::vector<Episode> episodes;
    std::vector<std::pair<long, double>> theta_series;       // (n, theta_hat(n)) seconds
    std::vector<double> cumulative_cost;                     // per step, length horizon
    std::vector<std::pair<long, double>> confidence_series;  // (n, xi(n)) seconds
    long deliveries = 0;
    long collisions = 0;
};

/// Certainty-equivalence learning: iterate the sampled event chain; at each
/// n = 2^k re-estimate the mean service time and re-plan; hold the plan
/// constant in between. Actual transmissions always follow the true
/// distribution.
LearnTrace run_ce_learning(const LearnConfig& config);

/// R(n) = cumulative_cost(n) - n * oracle_cost_per_step, reported raw.
std::vector<std::pair<long, double>> empirical_regret(const LearnTrace& trace,
                                                      double oracle_cost_per_step);

/// xi(n) = t_max * sqrt(2 log(n^gamma) / N); infinity when N = 0.
double confidence_radius(long n, long N, double gamma, double t_max);

/// Average realized cost per sampled step of the policy planned at the true
/// mean service time; the baseline constant for empirical_regret.
double oracle_cost_per_step(const LearnConfig& config, long steps);

}  // namespace agewake
