#include "agewake/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace agewake {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void SimConfig::validate() const {
    fleet.validate();
    const double mean = tx_dist.mean();
    if (std::abs(mean - fleet.mean_tx_time) > 1e-9 * std::max(1.0, fleet.mean_tx_time))
        throw std::invalid_argument("sim config: tx_dist mean " + std::to_string(mean) +
                                    " != fleet mean_tx_time " +
                                    std::to_string(fleet.mean_tx_time));
    const double expected_ts = fleet.ts_ratio * fleet.mean_tx_time;
    if (std::abs(sensing_time - expected_ts) > 1e-9 * std::max(1.0, expected_ts))
        throw std::invalid_argument("sim config: sensing_time inconsistent with ts_ratio");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
        throw std::invalid_argument("sim config: warmup_fraction must be in [0, 1)");
}

CycleEngine::CycleEngine(Eigen::ArrayXd sleep_means_s, double sensing_time_s,
                         TxTimeDist tx_dist, Rng rng, TimerPolicy policy)
    : sleep_means_(std::move(sleep_means_s)),
      sensing_time_(sensing_time_s),
      tx_dist_(tx_dist),
      rng_(rng),
      policy_(policy) {
    const int m = num_sources();
    if (m == 0) throw std::invalid_argument("engine: no sources");
    if (!(sleep_means_ > 0.0).all())
        throw std::invalid_argument("engine: sleep means must be > 0");
    if (!(sensing_time_ >= 0.0)) throw std::invalid_argument("engine: sensing_time < 0");
    last_generation_ = Eigen::ArrayXd::Zero(m);
    prev_service_.assign(m, kNaN);
    prev_delivery_.assign(m, kNaN);
}

void CycleEngine::set_sleep_means(const Eigen::ArrayXd& means_s) {
    if (means_s.size() != sleep_means_.size())
        throw std::invalid_argument("engine: sleep means size mismatch");
    if (!(means_s > 0.0).all())
        throw std::invalid_argument("engine: sleep means must be > 0");
    sleep_means_ = means_s;
    pending_wake_.clear();  // residual timers are not carried across a rate change
}

Eigen::ArrayXd CycleEngine::ages_at(double t) const { return t - last_generation_; }

CycleOutcome CycleEngine::step() {
    const int m = num_sources();
    CycleOutcome out;
    out.cycle_start = now_;

    if (policy_ == TimerPolicy::PreserveResidual && pending_wake_.empty()) {
        pending_wake_.resize(m);
        for (int i = 0; i < m; ++i) pending_wake_[i] = now_ + rng_.exponential(sleep_means_[i]);
    }

    // Absolute wake times for this cycle.
    std::vector<double> wake(m);
    if (policy_ == TimerPolicy::ResampleAll) {
        for (int i = 0; i < m; ++i) wake[i] = now_ + rng_.exponential(sleep_means_[i]);
    } else {
        wake = pending_wake_;
    }

    // First waker wins; exact float ties break toward the lowest index.
    int winner = 0;
    for (int i = 1; i < m; ++i)
        if (wake[i] < wake[winner]) winner = i;
    const double u0 = wake[winner];

    // Anyone waking within the winner's sensing window cannot detect it and
    // joins the burst; later wakers sense busy and go back to sleep.
    out.participants.clear();
    out.participants.push_back(winner);
    for (int i = 0; i < m; ++i)
        if (i != winner && wake[i] < u0 + sensing_time_) out.participants.push_back(i);
    std::sort(out.participants.begin(), out.participants.end());
    out.collision = out.participants.size() > 1;

    const double service = tx_dist_.sample(rng_);
    out.first_wake = u0;
    out.tx_start = u0 + sensing_time_;
    out.event_end = out.tx_start + service;
    out.service_time = service;
    out.winner = winner;
    out.peak = kNaN;
    out.prev_service = kNaN;
    out.inter_departure = kNaN;

    if (!out.collision) {
        out.prev_service = prev_service_[winner];
        if (std::isnan(out.prev_service)) {
            // First delivery for this source: age since the initial snapshot.
            out.peak = out.event_end - last_generation_[winner];
        } else {
            // The age peaks just before a delivery at the previous service
            // time plus the delivery gap; building the peak from the sum
            // keeps that decomposition bitwise for every recorded delivery.
            out.inter_departure = out.event_end - prev_delivery_[winner];
            out.peak = out.prev_service + out.inter_departure;
        }
        last_generation_[winner] = out.tx_start;
        prev_service_[winner] = service;
        prev_delivery_[winner] = out.event_end;
        ++total_deliveries_;
    }

    if (policy_ == TimerPolicy::PreserveResidual) {
        for (int idx : out.participants)
            pending_wake_[idx] = out.event_end + rng_.exponential(sleep_means_[idx]);
        for (int i = 0; i < m; ++i) {
            if (std::find(out.participants.begin(), out.participants.end(), i) !=
                out.participants.end())
                continue;
            // A pending waker that lands inside the busy period senses the
            // channel for t_s, then re-sleeps.
            while (pending_wake_[i] < out.event_end)
                pending_wake_[i] += sensing_time_ + rng_.exponential(sleep_means_[i]);
        }
    }

    now_ = out.event_end;
    return out;
}

namespace {

struct SourceAccum {
    long wins = 0;
    long deliveries = 0;
    double transmit_time = 0;
    double peak_sum = 0;
    double peak_sumsq = 0;
    double inter_dep_sum = 0;
    long inter_dep_count = 0;
};

bool stop_reached(const StopRule& stop, long cycles, const CycleEngine& engine) {
    switch (stop.kind) {
        case StopRule::Kind::Cycles: return cycles >= static_cast<long>(stop.value);
        case StopRule::Kind::SimTime: return engine.now() >= stop.value;
        case StopRule::Kind::Deliveries:
            return engine.total_deliveries() >= static_cast<long>(stop.value);
    }
    return true;
}

// Whether a completed cycle falls after the warm-up window.
bool past_warmup(const SimConfig& config, long cycle_index, double cycle_start,
                 long deliveries_before) {
    const double f = config.warmup_fraction;
    switch (config.stop.kind) {
        case StopRule::Kind::Cycles: return cycle_index >= f * config.stop.value;
        case StopRule::Kind::SimTime: return cycle_start >= f * config.stop.value;
        case StopRule::Kind::Deliveries: return deliveries_before >= f * config.stop.value;
    }
    return true;
}

}  // namespace

SimReport run_simulation(const SimConfig& config, const Eigen::ArrayXd& rates) {
    config.validate();
    if (rates.size() != config.fleet.size())
        throw std::domain_error("run_simulation: rates size mismatch");
    if (!(rates > 0.0).all()) throw std::domain_error("run_simulation: rates must be > 0");
    if (!(config.stop.value > 0)) throw std::domain_error("run_simulation: empty stop condition");

    const int m = config.fleet.size();
    const Eigen::ArrayXd sleep_means = config.fleet.mean_tx_time / rates;
    CycleEngine engine(sleep_means, config.sensing_time, config.tx_dist,
                       Rng::split(config.seed, 0), config.timer_policy);

    std::vector<SourceAccum> acc(m);
    long cycles_total = 0;
    long cycles_counted = 0;
    long collisions = 0;
    double window_start = kNaN;
    double window_end = 0;

    while (!stop_reached(config.stop, cycles_total, engine)) {
        const long deliveries_before = engine.total_deliveries();
        const CycleOutcome cyc = engine.step();
        const bool counted =
            past_warmup(config, cycles_total, cyc.cycle_start, deliveries_before);
        ++cycles_total;
        if (!counted) continue;
        if (std::isnan(window_start)) window_start = cyc.cycle_start;
        window_end = cyc.event_end;
        ++cycles_counted;
        if (cyc.collision) {
            ++collisions;
            for (int idx : cyc.participants) acc[idx].transmit_time += cyc.service_time;
        } else {
            SourceAccum& a = acc[cyc.winner];
            ++a.wins;
            ++a.deliveries;
            a.transmit_time += cyc.service_time;
            a.peak_sum += cyc.peak;
            a.peak_sumsq += cyc.peak * cyc.peak;
            if (!std::isnan(cyc.inter_departure)) {
                a.inter_dep_sum += cyc.inter_departure;
                ++a.inter_dep_count;
            }
        }
    }

    if (cycles_counted == 0)
        throw std::domain_error("run_simulation: no cycles after warm-up");

    SimReport report;
    report.cycles = cycles_counted;
    report.collisions = collisions;
    report.total_time = window_end - window_start;
    report.per_source.resize(m);
    const Eigen::ArrayXd w = config.fleet.weights();
    for (int i = 0; i < m; ++i) {
        const SourceAccum& a = acc[i];
        PerSourceStats& s = report.per_source[i];
        s.deliveries = a.deliveries;
        if (a.deliveries > 0) {
            s.peak_age_mean = a.peak_sum / a.deliveries;
            const double var =
                std::max(0.0, a.peak_sumsq / a.deliveries - s.peak_age_mean * s.peak_age_mean);
            s.peak_age_samples_stddev = std::sqrt(var);
        }
        s.empirical_access_prob = static_cast<double>(a.wins) / cycles_counted;
        s.empirical_transmit_fraction =
            report.total_time > 0 ? a.transmit_time / report.total_time : 0.0;
        s.mean_inter_departure =
            a.inter_dep_count > 0 ? a.inter_dep_sum / a.inter_dep_count : kNaN;
        report.weighted_avg_peak_age += w[i] * s.peak_age_mean;
    }
    return report;
}

SampledStream::SampledStream(const SimConfig& config, const Eigen::ArrayXd& rates)
    : config_(config),
      engine_(config.fleet.mean_tx_time / rates, config.sensing_time, config.tx_dist,
              Rng::split(config.seed, 0), config.timer_policy) {
    config_.validate();
    if (!(rates > 0.0).all()) throw std::domain_error("sampled_stream: rates must be > 0");
}

std::optional<Sample> SampledStream::next() {
    const int m = engine_.num_sources();
    if (next_index_ == 0) {
        Sample s;
        s.state.ages = Eigen::ArrayXd::Zero(m);
        s.state.modes.assign(m, 0);
        s.state.sample_index = next_index_++;
        s.event.kind = Event::Kind::Init;
        s.time = 0.0;
        return s;
    }

    if (pending_) {
        const CycleOutcome cyc = *pending_;
        pending_.reset();
        Sample s;
        s.time = cyc.event_end;
        s.state.ages = engine_.ages_at(cyc.event_end);
        s.state.modes.assign(m, 0);
        s.state.sample_index = next_index_++;
        if (cyc.collision) {
            s.event.kind = Event::Kind::CollisionEnd;
            s.event.participants = cyc.participants;
        } else {
            s.event.kind = Event::Kind::DeliveryEnd;
            s.event.source = cyc.winner;
            s.event.service_time = cyc.service_time;
            s.event.peak = cyc.peak;
        }
        return s;
    }

    if (done_ || stop_reached(config_.stop, emitted_cycles_, engine_)) {
        done_ = true;
        return std::nullopt;
    }

    const CycleOutcome cyc = engine_.step();
    ++emitted_cycles_;
    Sample s;
    s.time = cyc.tx_start;
    // The engine has already applied the delivery that ends this cycle;
    // subtract the service time so ages reflect the transmission start.
    s.state.ages = engine_.ages_at(cyc.event_end) - cyc.service_time;
    if (!cyc.collision) s.state.ages[cyc.winner] = cyc.peak - cyc.service_time;
    s.state.modes.assign(m, 0);
    s.state.modes[cyc.winner] = 1;
    s.state.sample_index = next_index_++;
    s.event.kind = Event::Kind::AccessStart;
    s.event.source = cyc.winner;
    pending_ = cyc;
    return s;
}

EnergyAudit energy_audit(const SimReport& report, const Fleet& fleet,
                         const std::vector<BatterySpec>& batteries) {
    if (report.cycles <= 0) throw std::domain_error("energy_audit: empty report");
    const int m = fleet.size();
    if (static_cast<int>(report.per_source.size()) != m ||
        static_cast<int>(batteries.size()) != m)
        throw std::domain_error("energy_audit: length mismatch");
    EnergyAudit audit;
    audit.actual_power.resize(m);
    audit.lifetime_met.resize(m);
    for (int i = 0; i < m; ++i) {
        const BatterySpec& bat = batteries[i];
        const double p_max = bat.initial_energy / bat.target_lifetime + bat.replenish_rate;
        audit.actual_power[i] = report.per_source[i].empirical_transmit_fraction * bat.avg_tx_power;
        audit.lifetime_met[i] = audit.actual_power[i] <= p_max * (1.0 + 1e-9);
    }
    return audit;
}

}  // namespace agewake
