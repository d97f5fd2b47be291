#include "agewake/learner.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace agewake {

void LearnConfig::validate() const {
    if (weights.size() == 0 || weights.size() != efficiencies.size())
        throw std::invalid_argument("learn config: weights/efficiencies size mismatch");
    if (!(sensing_time > 0.0))
        throw std::invalid_argument("learn config: sensing_time must be > 0");
    if (horizon < 2) throw std::invalid_argument("learn config: horizon must be >= 2");
    if (theta_init && !(*theta_init > 0.0))
        throw std::invalid_argument("learn config: theta_init must be > 0");
    if (pinned_theta && !(*pinned_theta > 0.0))
        throw std::invalid_argument("learn config: pinned_theta must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("learn config: gamma must be > 0");
}

double confidence_radius(long n, long N, double gamma, double t_max) {
    if (n < 1) throw std::invalid_argument("confidence_radius: n must be >= 1");
    if (N <= 0) return std::numeric_limits<double>::infinity();
    return t_max * std::sqrt(2.0 * gamma * std::log(static_cast<double>(n)) / N);
}

std::vector<std::pair<long, double>> empirical_regret(const LearnTrace& trace,
                                                      double oracle_cost_per_step) {
    std::vector<std::pair<long, double>> regret;
    regret.reserve(trace.cumulative_cost.size());
    for (size_t i = 0; i < trace.cumulative_cost.size(); ++i) {
        const long n = static_cast<long>(i) + 1;
        regret.emplace_back(n, trace.cumulative_cost[i] - n * oracle_cost_per_step);
    }
    return regret;
}

namespace {

/// Shared stepping loop; record=false skips the per-step trace (used for the
/// long oracle baseline runs).
LearnTrace run_loop(const LearnConfig& config, long horizon, bool record) {
    config.validate();

    const double t_max = config.true_dist.max();
    const double theta0 = config.theta_init.value_or(0.5 * t_max);
    const double true_mean = config.true_dist.mean();
    const Eigen::ArrayXd w = config.weights;

    // The stream needs a self-consistent config; the believed sleep means are
    // installed directly on the engine below, so the rates passed here are a
    // placeholder.
    SimConfig sim;
    sim.fleet = make_fleet(config.weights, config.efficiencies,
                           config.sensing_time / true_mean, true_mean);
    sim.tx_dist = config.true_dist;
    sim.sensing_time = config.sensing_time;
    sim.seed = config.seed;
    sim.stop = StopRule::cycles(std::numeric_limits<long>::max() / 4);
    SampledStream stream(sim, Eigen::ArrayXd::Ones(w.size()));

    ThetaEstimator estimator;
    LearnTrace trace;
    if (record) {
        trace.theta_series.reserve(horizon);
        trace.cumulative_cost.reserve(horizon);
        trace.confidence_series.reserve(horizon);
    }
    double cum_cost = 0;
    std::optional<Regime> first_regime;

    auto effective_theta = [&]() {
        if (config.pinned_theta) return *config.pinned_theta;
        return estimator.n_samples() > 0 ? estimator.current_estimate() : theta0;
    };

    for (long n = 1; n <= horizon; ++n) {
        // Episode boundary: n = 2^k.
        if ((n & (n - 1)) == 0) {
            const double theta = effective_theta();
            Fleet believed = make_fleet(config.weights, config.efficiencies,
                                        config.sensing_time / theta, theta);
            RegimeSolution sol = plan(believed);
            if (!first_regime) {
                first_regime = sol.plan.regime;
            } else if (*first_regime != sol.plan.regime) {
                throw std::logic_error("learner: regime flipped across episodes");
            }
            stream.engine().set_sleep_means(theta / sol.plan.rates);
            trace.episodes.push_back({n, theta, sol.plan});
        }

        std::optional<Sample> sample = stream.next();
        if (!sample) throw std::logic_error("learner: stream ended before horizon");
        if (sample->event.kind == Event::Kind::DeliveryEnd) {
            estimator.observe(sample->event.service_time);
            cum_cost += w[sample->event.source] * sample->event.peak;
            ++trace.deliveries;
        } else if (sample->event.kind == Event::Kind::CollisionEnd) {
            ++trace.collisions;
        }

        if (record) {
            trace.theta_series.emplace_back(n, effective_theta());
            trace.cumulative_cost.push_back(cum_cost);
            trace.confidence_series.emplace_back(
                n, confidence_radius(n, estimator.n_samples(), config.gamma, t_max));
        } else if (n == horizon) {
            trace.cumulative_cost.push_back(cum_cost);
        }
    }
    return trace;
}

}  // namespace

LearnTrace run_ce_learning(const LearnConfig& config) {
    return run_loop(config, config.horizon, /*record=*/true);
}

double oracle_cost_per_step(const LearnConfig& config, long steps) {
    if (steps < 2) throw std::invalid_argument("oracle_cost_per_step: steps must be >= 2");
    LearnConfig pinned = config;
    pinned.pinned_theta = config.true_dist.mean();
    pinned.horizon = steps;
    const LearnTrace trace = run_loop(pinned, steps, /*record=*/false);
    return trace.cumulative_cost.back() / static_cast<double>(steps);
}

}  // namespace agewake
