#pragma once

#include "agewake/rng.hpp"
#include "agewake/tx_time.hpp"
#include "agewake/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace agewake {

/// How pending sleep timers are treated when a transmission/collision event
/// ends. ResampleAll redraws every timer (justified by memorylessness and
/// the default); PreserveResidual keeps untouched timers running and models
/// busy-sensing re-sleeps explicitly, and exists so tests can check the two
/// are statistically indistinguishable.
enum class TimerPolicy { ResampleAll, PreserveResidual };

struct StopRule {
    enum class Kind { Cycles, SimTime, Deliveries };
    Kind kind = Kind::Cycles;
    double value = 0;

    static StopRule cycles(long n) { return {Kind::Cycles, static_cast<double>(n)}; }
    static StopRule sim_time(double seconds) { return {Kind::SimTime, seconds}; }
    static StopRule deliveries(long n) { return {Kind::Deliveries, static_cast<double>(n)}; }
};

struct SimConfig {
    Fleet fleet;
    TxTimeDist tx_dist = TxTimeDist::deterministic(1.0);
    double sensing_time = 0.0;  // seconds; must equal fleet.ts_ratio * fleet.mean_tx_time
    std::uint64_t seed = 0;
    StopRule stop;
    TimerPolicy timer_policy = TimerPolicy::ResampleAll;
    double warmup_fraction = 0.01;  // leading fraction of the run excluded from statistics

    void validate() const;
};

struct PerSourceStats {
    long deliveries = 0;
    double peak_age_mean = 0;            // seconds
    double peak_age_samples_stddev = 0;  // seconds
    double empirical_access_prob = 0;    // fraction of cycles won
    double empirical_transmit_fraction = 0;
    double mean_inter_departure = 0;  // seconds
};

struct SimReport {
    std::vector<PerSourceStats> per_source;
    long cycles = 0;
    long collisions = 0;
    double weighted_avg_peak_age = 0;  // seconds, sum of w_l * peak_age_mean_l
    double total_time = 0;             // seconds covered by the statistics window
};

/// One sleep-wake cycle as produced by the event engine: the idle wait, who
/// woke first, who joined the sensing window, and the outcome.
struct CycleOutcome {
    double cycle_start;
    double first_wake;    // u0
    double tx_start;      // u0 + t_s, packet generation instant on success
    double event_end;     // u0 + t_s + T
    double service_time;  // T
    bool collision;
    int winner;                     // first waker (meaningful on success)
    std::vector<int> participants;  // sources waking within [u0, u0 + t_s)
    // Success-only fields; NaN when not applicable.
    double peak;             // age of the winner just before delivery
    double prev_service;     // winner's previous service time
    double inter_departure;  // delivery gap to the winner's previous delivery
};

/// Continuous-time engine for the sleep-wake protocol. One instance owns its
/// RNG and is strictly single-threaded; sleep means may be changed between
/// cycles (the learner does this at episode boundaries).
class CycleEngine {
  public:
    CycleEngine(Eigen::ArrayXd sleep_means_s, double sensing_time_s, TxTimeDist tx_dist,
                Rng rng, TimerPolicy policy = TimerPolicy::ResampleAll);

    CycleOutcome step();

    void set_sleep_means(const Eigen::ArrayXd& means_s);

    int num_sources() const { return static_cast<int>(sleep_means_.size()); }
    double now() const { return now_; }
    long total_deliveries() const { return total_deliveries_; }

    /// Age of each source at time t >= time of last processed event.
    Eigen::ArrayXd ages_at(double t) const;

  private:
    Eigen::ArrayXd sleep_means_;
    double sensing_time_;
    TxTimeDist tx_dist_;
    Rng rng_;
    TimerPolicy policy_;

    double now_ = 0.0;
    long total_deliveries_ = 0;
    Eigen::ArrayXd last_generation_;     // U_l: generation time of freshest delivered packet
    std::vector<double> prev_service_;   // last service time per source (NaN before first)
    std::vector<double> prev_delivery_;  // last delivery instant per source (NaN before first)
    std::vector<double> pending_wake_;   // absolute wake times (PreserveResidual only)
};

/// Runs the protocol until the stop condition and accumulates the empirical
/// statistics, excluding a leading warm-up window. Same (config, rates, seed)
/// gives a bit-identical report.
SimReport run_simulation(const SimConfig& config, const Eigen::ArrayXd& rates);

struct SampledState {
    Eigen::ArrayXd ages;     // seconds, at the sampling instant (right-continuous)
    std::vector<int> modes;  // 1 = transmitting
    long sample_index;
};

struct Event {
    enum class Kind { Init, AccessStart, DeliveryEnd, CollisionEnd };
    Kind kind = Kind::Init;
    int source = -1;           // AccessStart / DeliveryEnd
    double service_time = 0;   // DeliveryEnd
    double peak = 0;           // DeliveryEnd
    std::vector<int> participants;  // CollisionEnd
};

struct Sample {
    SampledState state;
    Event event;
    double time;  // seconds
};

/// The discrete-time chain obtained by sampling the continuous-time system
/// at transmission starts and ends. Sample 0 is the initial state (all
/// sleeping, ages zero); each subsequent cycle contributes an AccessStart
/// and a DeliveryEnd or CollisionEnd. Consuming the stream and folding the
/// delivery peaks reproduces run_simulation's peak statistics exactly.
class SampledStream {
  public:
    SampledStream(const SimConfig& config, const Eigen::ArrayXd& rates);

    std::optional<Sample> next();

    CycleEngine& engine() { return engine_; }

  private:
    SimConfig config_;
    CycleEngine engine_;
    long next_index_ = 0;
    long emitted_cycles_ = 0;
    std::optional<CycleOutcome> pending_;  // end-of-event half of the current cycle
    bool done_ = false;
};

struct EnergyAudit {
    Eigen::ArrayXd actual_power;  // watts per source
    std::vector<bool> lifetime_met;
};

/// Converts empirical transmit fractions into actual power draw and checks
/// each source against its battery budget.
EnergyAudit energy_audit(const SimReport& report, const Fleet& fleet,
                         const std::vector<BatterySpec>& batteries);

}  // namespace agewake
