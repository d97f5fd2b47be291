// Configuration-driven experiment runner for the sleep-wake scheduler:
// solve plans, run simulations, run learning, sweep parameters, and emit
// machine-readable CSV/TSV results.

#include "agewake/analytic.hpp"
#include "agewake/learner.hpp"
#include "agewake/planner.hpp"
#include "agewake/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using json = nlohmann::json;
using namespace agewake;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// formatting

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

// ---------------------------------------------------------------------------
// strict JSON schema helpers

void reject_unknown_keys(const json& obj, const std::string& context,
                         const std::vector<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError(context + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("key '" + key + "': " + e.what());
    }
}

template <typename T>
T get_required(const json& obj, const std::string& context, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(context + "." + key + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// experiment configuration

enum class Scenario {
    Solve,
    Simulate,
    Learn,
    SweepTsRatio,
    SweepM,
    SweepEfficiency,
    SweepLifetime,
    CompareBaselines,
    Oracle,
};

Scenario parse_scenario(const std::string& s) {
    if (s == "solve") return Scenario::Solve;
    if (s == "simulate") return Scenario::Simulate;
    if (s == "learn") return Scenario::Learn;
    if (s == "sweep_ts_ratio") return Scenario::SweepTsRatio;
    if (s == "sweep_m") return Scenario::SweepM;
    if (s == "sweep_efficiency") return Scenario::SweepEfficiency;
    if (s == "sweep_lifetime") return Scenario::SweepLifetime;
    if (s == "compare_baselines") return Scenario::CompareBaselines;
    if (s == "oracle") return Scenario::Oracle;
    throw ConfigError("unknown scenario '" + s + "'");
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Solve: return "solve";
        case Scenario::Simulate: return "simulate";
        case Scenario::Learn: return "learn";
        case Scenario::SweepTsRatio: return "sweep_ts_ratio";
        case Scenario::SweepM: return "sweep_m";
        case Scenario::SweepEfficiency: return "sweep_efficiency";
        case Scenario::SweepLifetime: return "sweep_lifetime";
        case Scenario::CompareBaselines: return "compare_baselines";
        case Scenario::Oracle: return "oracle";
    }
    return "?";
}

struct RandomFleetSpec {
    int count = 0;
    double weight_lo = 0, weight_hi = 10;
    double efficiency_lo = 0, efficiency_hi = 1;
    std::uint64_t master_seed = 0;
};

struct FleetSpec {
    Eigen::ArrayXd weights;       // explicit mode
    Eigen::ArrayXd efficiencies;  // explicit mode
    std::optional<RandomFleetSpec> random;
    double ts_ratio = 0.01;
    double mean_tx_time = 1.0;
};

struct RunControls {
    long cycles = 100000;
    long horizon = 1 << 16;
    int seeds = 1;
    int replications = 100;
    std::uint64_t seed = 1;
    long oracle_steps = 1000000;
    double gamma = 4.0;
};

struct SweepGrids {
    std::vector<double> ts_ratios;
    std::vector<int> counts;
    std::vector<double> efficiency_scales;
    std::vector<double> lifetimes_years;
};

struct BatteryInput {
    double capacity_mah = 8.0;
    double voltage_v = 5.0;
    double tx_power_mw = 24.75;
    double replenish_mw = 0.0;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Solve;
    FleetSpec fleet;
    std::optional<TxTimeDist> tx_dist;
    RunControls run;
    SweepGrids sweep;
    BatteryInput battery;
    std::string output;
};

Eigen::ArrayXd parse_array(const json& arr, const std::string& context) {
    if (!arr.is_array() || arr.empty())
        throw ConfigError(context + ": expected a non-empty array of numbers");
    Eigen::ArrayXd out(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw ConfigError(context + ": element " + std::to_string(i) +
                                                   " is not a number");
        out[static_cast<int>(i)] = arr[i].get<double>();
    }
    return out;
}

FleetSpec parse_fleet(const json& obj) {
    reject_unknown_keys(obj, "fleet",
                        {"weights", "efficiencies", "random", "ts_ratio", "mean_tx_time"});
    FleetSpec spec;
    spec.ts_ratio = get_or(obj, "ts_ratio", 0.01);
    spec.mean_tx_time = get_or(obj, "mean_tx_time", 1.0);
    const bool has_explicit = obj.contains("weights") || obj.contains("efficiencies");
    if (obj.contains("random")) {
        if (has_explicit)
            throw ConfigError("fleet: give either explicit weights/efficiencies or 'random'");
        const json& r = obj.at("random");
        reject_unknown_keys(r, "fleet.random",
                            {"count", "weight_range", "efficiency_range", "master_seed"});
        RandomFleetSpec rnd;
        rnd.count = get_required<int>(r, "fleet.random", "count");
        if (rnd.count < 1) throw ConfigError("fleet.random.count must be >= 1");
        const auto wr = get_or<std::vector<double>>(r, "weight_range", {0.0, 10.0});
        const auto br = get_or<std::vector<double>>(r, "efficiency_range", {0.0, 1.0});
        if (wr.size() != 2 || br.size() != 2)
            throw ConfigError("fleet.random ranges must be [lo, hi] pairs");
        rnd.weight_lo = wr[0];
        rnd.weight_hi = wr[1];
        rnd.efficiency_lo = br[0];
        rnd.efficiency_hi = br[1];
        rnd.master_seed = get_required<std::uint64_t>(r, "fleet.random", "master_seed");
        spec.random = rnd;
    } else {
        if (!obj.contains("weights") || !obj.contains("efficiencies"))
            throw ConfigError("fleet: needs weights+efficiencies or a 'random' block");
        spec.weights = parse_array(obj.at("weights"), "fleet.weights");
        spec.efficiencies = parse_array(obj.at("efficiencies"), "fleet.efficiencies");
        if (spec.weights.size() != spec.efficiencies.size())
            throw ConfigError("fleet: weights and efficiencies must have equal length");
    }
    return spec;
}

TxTimeDist parse_tx_dist(const json& obj) {
    reject_unknown_keys(obj, "tx_dist", {"kind", "value", "low", "high", "mean", "t_max"});
    const std::string kind = get_required<std::string>(obj, "tx_dist", "kind");
    try {
        if (kind == "deterministic")
            return TxTimeDist::deterministic(get_required<double>(obj, "tx_dist", "value"));
        if (kind == "uniform")
            return TxTimeDist::uniform(get_required<double>(obj, "tx_dist", "low"),
                                       get_required<double>(obj, "tx_dist", "high"));
        if (kind == "truncated_exponential")
            return TxTimeDist::truncated_exponential(
                get_required<double>(obj, "tx_dist", "mean"),
                get_required<double>(obj, "tx_dist", "t_max"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("tx_dist: ") + e.what());
    }
    throw ConfigError("tx_dist.kind must be deterministic | uniform | truncated_exponential");
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    reject_unknown_keys(root, "config",
                        {"scenario", "fleet", "tx_dist", "run", "sweep", "battery", "output"});

    ExperimentConfig cfg;
    cfg.scenario = parse_scenario(get_required<std::string>(root, "config", "scenario"));
    if (!root.contains("fleet")) throw ConfigError("config: missing 'fleet'");
    cfg.fleet = parse_fleet(root.at("fleet"));
    if (root.contains("tx_dist")) cfg.tx_dist = parse_tx_dist(root.at("tx_dist"));

    if (root.contains("run")) {
        const json& r = root.at("run");
        reject_unknown_keys(
            r, "run",
            {"cycles", "horizon", "seeds", "replications", "seed", "oracle_steps", "gamma"});
        cfg.run.cycles = get_or<long>(r, "cycles", cfg.run.cycles);
        cfg.run.horizon = get_or<long>(r, "horizon", cfg.run.horizon);
        cfg.run.seeds = get_or<int>(r, "seeds", cfg.run.seeds);
        cfg.run.replications = get_or<int>(r, "replications", cfg.run.replications);
        cfg.run.seed = get_or<std::uint64_t>(r, "seed", cfg.run.seed);
        cfg.run.oracle_steps = get_or<long>(r, "oracle_steps", cfg.run.oracle_steps);
        cfg.run.gamma = get_or<double>(r, "gamma", cfg.run.gamma);
    }
    if (root.contains("sweep")) {
        const json& s = root.at("sweep");
        reject_unknown_keys(s, "sweep",
                            {"ts_ratios", "counts", "efficiency_scales", "lifetimes_years"});
        cfg.sweep.ts_ratios = get_or<std::vector<double>>(s, "ts_ratios", {});
        cfg.sweep.counts = get_or<std::vector<int>>(s, "counts", {});
        cfg.sweep.efficiency_scales = get_or<std::vector<double>>(s, "efficiency_scales", {});
        cfg.sweep.lifetimes_years = get_or<std::vector<double>>(s, "lifetimes_years", {});
    }
    if (root.contains("battery")) {
        const json& b = root.at("battery");
        reject_unknown_keys(b, "battery",
                            {"capacity_mah", "voltage_v", "tx_power_mw", "replenish_mw"});
        cfg.battery.capacity_mah = get_or<double>(b, "capacity_mah", cfg.battery.capacity_mah);
        cfg.battery.voltage_v = get_or<double>(b, "voltage_v", cfg.battery.voltage_v);
        cfg.battery.tx_power_mw = get_or<double>(b, "tx_power_mw", cfg.battery.tx_power_mw);
        cfg.battery.replenish_mw = get_or<double>(b, "replenish_mw", cfg.battery.replenish_mw);
    }
    cfg.output = get_or<std::string>(root, "output", "");
    return cfg;
}

// ---------------------------------------------------------------------------
// fleet realization

Eigen::ArrayXd draw_uniform(Rng& rng, int n, double lo, double hi) {
    Eigen::ArrayXd out(n);
    for (int i = 0; i < n; ++i) {
        double v = lo + (hi - lo) * rng.uniform01();
        if (v <= 0.0) v = lo + (hi - lo) * 1e-9;  // keep parameters strictly positive
        out[i] = v;
    }
    return out;
}

Fleet realize_fleet(const FleetSpec& spec, std::uint64_t instance) {
    if (spec.random) {
        const RandomFleetSpec& r = *spec.random;
        Rng rng = Rng::split(r.master_seed, instance);
        Eigen::ArrayXd w = draw_uniform(rng, r.count, r.weight_lo, r.weight_hi);
        Eigen::ArrayXd b = draw_uniform(rng, r.count, r.efficiency_lo, r.efficiency_hi);
        return make_fleet(w, b, spec.ts_ratio, spec.mean_tx_time);
    }
    return make_fleet(spec.weights, spec.efficiencies, spec.ts_ratio, spec.mean_tx_time);
}

TxTimeDist resolve_tx_dist(const ExperimentConfig& cfg, const Fleet& fleet) {
    if (cfg.tx_dist) {
        const double mean = cfg.tx_dist->mean();
        if (std::abs(mean - fleet.mean_tx_time) > 1e-9 * std::max(1.0, fleet.mean_tx_time))
            throw ConfigError("tx_dist mean " + fmt(mean) + " != fleet.mean_tx_time " +
                              fmt(fleet.mean_tx_time));
        return *cfg.tx_dist;
    }
    return TxTimeDist::deterministic(fleet.mean_tx_time);
}

// ---------------------------------------------------------------------------
// output plumbing

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ConfigError("cannot open output file: " + path);
            out_ = &file_;
        } else {
            out_ = &std::cout;
        }
    }

    void comment(const std::string& line) { *out_ << "# " << line << "\n"; }
    void raw(const std::string& line) { *out_ << line << "\n"; }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) *out_ << ',';
            *out_ << cells[i];
        }
        *out_ << "\n";
    }

  private:
    std::ofstream file_;
    std::ostream* out_;
};

int worker_count(int jobs_flag, size_t tasks) {
    int n = jobs_flag > 0 ? jobs_flag : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("AGEWAKE_MAX_WORKERS")) {
        const int c = std::atoi(cap);
        if (c >= 1 && c < n) n = c;
    }
    return static_cast<int>(std::min<size_t>(n, tasks));
}

/// Runs tasks on a pool; results keep task order so output is deterministic.
std::vector<std::string> run_parallel(int jobs, std::vector<std::function<std::string()>> tasks) {
    std::vector<std::string> results(tasks.size());
    if (tasks.empty()) return results;
    const int n = worker_count(jobs, tasks.size());
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                results[i] = tasks[i]();
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// scenarios

void run_solve(const ExperimentConfig& cfg, CsvWriter& out) {
    const Fleet fleet = realize_fleet(cfg.fleet, 0);
    const RegimeSolution sol = plan(fleet);
    const SyncSolution sync = synchronized_optimum(fleet.weights(), fleet.efficiencies());

    out.comment("m: number of sources; ts_ratio: sensing time / mean service time");
    out.comment("regime: adequate (sum b >= 1) or scarce; beta_star, x_star: broadcast scalars");
    out.comment("objective: weighted average peak age at the plan (normalized, = upper_bound)");
    out.comment("lower_bound/upper_bound/gap_bound/gap_constant: optimality certificates");
    out.comment("asymptote: common limit of the bounds as ts_ratio -> 0");
    out.comment("sync_value: optimal synchronized (collision-free) scheduler value");
    out.comment("rate_i: normalized sleep rate of source i (mean sleep = E[T]/rate_i)");
    std::vector<std::string> header = {"m",           "ts_ratio",   "regime",      "beta_star",
                                       "x_star",      "objective",  "lower_bound", "upper_bound",
                                       "gap_constant", "gap_bound", "asymptote",   "sync_value"};
    for (int i = 0; i < fleet.size(); ++i) header.push_back("rate_" + std::to_string(i));
    out.row(header);

    std::vector<std::string> row = {
        fmt(fleet.size()),
        fmt(fleet.ts_ratio),
        sol.plan.regime == Regime::EnergyAdequate ? "adequate" : "scarce",
        fmt(sol.plan.beta_star),
        fmt(sol.plan.x_star),
        fmt(sol.upper_bound),
        fmt(sol.lower_bound),
        fmt(sol.upper_bound),
        fmt(sol.gap_constant),
        fmt(sol.gap_bound),
        fmt(sol.asymptote),
        fmt(sync.value)};
    for (int i = 0; i < fleet.size(); ++i) row.push_back(fmt(sol.plan.rates[i]));
    out.row(row);
}

void write_event_trace(const std::string& path, const SimConfig& sim,
                       const Eigen::ArrayXd& rates) {
    std::ofstream tf(path);
    if (!tf) throw ConfigError("cannot open trace file: " + path);
    tf << "time_s\tevent_kind\tsource_id\tservice_time_s\tpeak_s\n";
    SampledStream stream(sim, rates);
    while (auto s = stream.next()) {
        const char* kind = "init";
        switch (s->event.kind) {
            case Event::Kind::Init: kind = "init"; break;
            case Event::Kind::AccessStart: kind = "access_start"; break;
            case Event::Kind::DeliveryEnd: kind = "delivery_end"; break;
            case Event::Kind::CollisionEnd: kind = "collision_end"; break;
        }
        tf << fmt(s->time) << '\t' << kind << '\t' << s->event.source << '\t'
           << fmt(s->event.service_time) << '\t' << fmt(s->event.peak) << "\n";
    }
}

void run_simulate(const ExperimentConfig& cfg, CsvWriter& out, bool trace) {
    const Fleet fleet = realize_fleet(cfg.fleet, 0);
    const RegimeSolution sol = plan(fleet);

    SimConfig sim;
    sim.fleet = fleet;
    sim.tx_dist = resolve_tx_dist(cfg, fleet);
    sim.sensing_time = fleet.sensing_time();
    sim.seed = cfg.run.seed;
    sim.stop = StopRule::cycles(cfg.run.cycles);
    const SimReport report = run_simulation(sim, sol.plan.rates);

    const PeakAge analytic = expected_weighted_peak_age(fleet, sol.plan.rates);
    const Eigen::ArrayXd alpha = access_probabilities(sol.plan.rates, fleet.ts_ratio);
    const Eigen::ArrayXd sigma = transmit_fractions(sol.plan.rates, fleet.ts_ratio);

    out.comment("one row per source; *_s columns are in seconds");
    out.comment("sim_* columns are empirical over " + fmt(report.cycles) +
                " post-warmup cycles; analytic_* from the closed-form model");
    out.comment("weighted_avg_peak_age_s: sim=" + fmt(report.weighted_avg_peak_age) +
                " analytic=" + fmt(analytic.total_seconds));
    out.row({"source", "weight", "efficiency", "rate", "deliveries", "sim_peak_mean_s",
             "analytic_peak_s", "sim_access_prob", "analytic_access_prob", "sim_tx_fraction",
             "analytic_tx_fraction"});
    for (int i = 0; i < fleet.size(); ++i) {
        const PerSourceStats& s = report.per_source[i];
        out.row({fmt(i), fmt(fleet.sources[i].weight), fmt(fleet.sources[i].power_efficiency),
                 fmt(sol.plan.rates[i]), fmt(s.deliveries), fmt(s.peak_age_mean),
                 fmt(analytic.per_source[i] * fleet.mean_tx_time), fmt(s.empirical_access_prob),
                 fmt(alpha[i]), fmt(s.empirical_transmit_fraction), fmt(sigma[i])});
    }

    if (trace) {
        const std::string path = (cfg.output.empty() ? "simulate" : cfg.output) + ".trace.tsv";
        SimConfig trace_sim = sim;
        trace_sim.stop = StopRule::cycles(std::min<long>(cfg.run.cycles, 10000));
        write_event_trace(path, trace_sim, sol.plan.rates);
    }
}

LearnConfig make_learn_config(const ExperimentConfig& cfg, const Fleet& fleet,
                              const TxTimeDist& dist) {
    LearnConfig lc;
    lc.true_dist = dist;
    lc.weights = fleet.weights();
    lc.efficiencies = fleet.efficiencies();
    lc.sensing_time = fleet.sensing_time();
    lc.horizon = cfg.run.horizon;
    lc.gamma = cfg.run.gamma;
    lc.seed = cfg.run.seed;
    return lc;
}

void write_learn_trace(const std::string& path, const LearnTrace& trace, double oracle_cost) {
    std::ofstream tf(path);
    if (!tf) throw ConfigError("cannot open trace file: " + path);
    tf << "n\tepisode_k\ttheta_hat_s\tcumulative_cost\tregret\txi_s\n";
    size_t ep = 0;
    for (size_t i = 0; i < trace.theta_series.size(); ++i) {
        const long n = trace.theta_series[i].first;
        while (ep + 1 < trace.episodes.size() && trace.episodes[ep + 1].start_index <= n) ++ep;
        tf << n << '\t' << ep << '\t' << fmt(trace.theta_series[i].second) << '\t'
           << fmt(trace.cumulative_cost[i]) << '\t'
           << fmt(trace.cumulative_cost[i] - n * oracle_cost) << '\t'
           << fmt(trace.confidence_series[i].second) << "\n";
    }
}

void run_learn(const ExperimentConfig& cfg, CsvWriter& out, int jobs, bool trace) {
    const Fleet fleet = realize_fleet(cfg.fleet, 0);
    const TxTimeDist dist = resolve_tx_dist(cfg, fleet);
    const LearnConfig base = make_learn_config(cfg, fleet, dist);

    LearnConfig oracle_cfg = base;
    oracle_cfg.seed = Rng::split(cfg.run.seed, 0xa11ce)  // dedicated stream for the baseline
                          .next_u64();
    const double oracle_cost = oracle_cost_per_step(oracle_cfg, cfg.run.oracle_steps);

    std::vector<std::function<std::string()>> tasks;
    std::vector<LearnTrace> traces(cfg.run.seeds);
    for (int s = 0; s < cfg.run.seeds; ++s) {
        tasks.emplace_back([&, s]() -> std::string {
            LearnConfig lc = base;
            lc.seed = Rng::split(cfg.run.seed, static_cast<std::uint64_t>(s)).next_u64();
            LearnTrace tr = run_ce_learning(lc);
            std::string rows;
            size_t ep = 0;
            for (long n = 1; n <= lc.horizon; n *= 2) {
                const size_t i = static_cast<size_t>(n - 1);
                while (ep + 1 < tr.episodes.size() && tr.episodes[ep + 1].start_index <= n) ++ep;
                rows += join_row({fmt(s), fmt(n), fmt(static_cast<long>(ep)),
                                  fmt(tr.theta_series[i].second), fmt(tr.cumulative_cost[i]),
                                  fmt(tr.cumulative_cost[i] - n * oracle_cost),
                                  fmt(tr.confidence_series[i].second)});
                rows += "\n";
            }
            traces[s] = std::move(tr);
            return rows;
        });
    }
    const std::vector<std::string> rows = run_parallel(jobs, std::move(tasks));

    out.comment("learning checkpoints at dyadic n; one block per seed");
    out.comment("theta_hat_s: service-time estimate; regret = cum_cost - n * oracle_cost_per_step");
    out.comment("oracle_cost_per_step=" + fmt(oracle_cost) + " over " + fmt(cfg.run.oracle_steps) +
                " steps");
    out.row({"seed", "n", "episode_k", "theta_hat_s", "cumulative_cost", "regret", "xi_s"});
    for (const std::string& block : rows) {
        std::istringstream iss(block);
        std::string line;
        while (std::getline(iss, line)) out.raw(line);
    }

    if (trace) {
        const std::string path = (cfg.output.empty() ? "learn" : cfg.output) + ".trace.tsv";
        write_learn_trace(path, traces[0], oracle_cost);
    }
}

void run_oracle(const ExperimentConfig& cfg, CsvWriter& out) {
    const Fleet fleet = realize_fleet(cfg.fleet, 0);
    const TxTimeDist dist = resolve_tx_dist(cfg, fleet);
    LearnConfig lc = make_learn_config(cfg, fleet, dist);
    const double cost = oracle_cost_per_step(lc, cfg.run.oracle_steps);
    out.comment("Monte-Carlo average cost per sampled step of the true-mean plan");
    out.row({"steps", "theta_true_s", "oracle_cost_per_step"});
    out.row({fmt(cfg.run.oracle_steps), fmt(dist.mean()), fmt(cost)});
}

void run_sweep_ts_ratio(const ExperimentConfig& cfg, CsvWriter& out, int jobs) {
    if (cfg.sweep.ts_ratios.empty()) throw ConfigError("sweep.ts_ratios must be non-empty");
    const int seeds = cfg.run.cycles > 0 ? cfg.run.seeds : 0;

    struct Item {
        double eps;
        int seed;
    };
    std::vector<Item> items;
    for (double eps : cfg.sweep.ts_ratios) {
        if (seeds == 0) items.push_back({eps, -1});
        for (int s = 0; s < seeds; ++s) items.push_back({eps, s});
    }
    std::vector<std::function<std::string()>> tasks;
    for (const Item& it : items) {
        tasks.emplace_back([&, it]() -> std::string {
            FleetSpec fs = cfg.fleet;
            fs.ts_ratio = it.eps;
            const Fleet fleet = realize_fleet(fs, 0);
            const RegimeSolution sol = plan(fleet);
            double sim_peak = std::numeric_limits<double>::quiet_NaN();
            if (it.seed >= 0) {
                SimConfig sim;
                sim.fleet = fleet;
                sim.tx_dist = resolve_tx_dist(cfg, fleet);
                sim.sensing_time = fleet.sensing_time();
                sim.seed = Rng::split(cfg.run.seed, static_cast<std::uint64_t>(it.seed)).next_u64();
                sim.stop = StopRule::cycles(cfg.run.cycles);
                sim_peak = run_simulation(sim, sol.plan.rates).weighted_avg_peak_age /
                           fleet.mean_tx_time;
            }
            return join_row({fmt(it.eps), fmt(it.seed), fmt(sol.upper_bound),
                             fmt(sol.lower_bound), fmt(sol.asymptote), fmt(sim_peak)});
        });
    }
    const std::vector<std::string> rows = run_parallel(jobs, std::move(tasks));
    out.comment("objective: analytic weighted avg peak age at the plan (normalized)");
    out.comment("sim_peak: simulated counterpart (normalized; nan when cycles = 0)");
    out.row({"ts_ratio", "seed", "objective", "lower_bound", "asymptote", "sim_peak"});
    for (const std::string& r : rows) out.raw(r);
}

void run_sweep_m(const ExperimentConfig& cfg, CsvWriter& out, int jobs) {
    if (cfg.sweep.counts.empty()) throw ConfigError("sweep.counts must be non-empty");
    if (!cfg.fleet.random) throw ConfigError("sweep_m requires fleet.random");

    struct Item {
        int m;
        int seed;
    };
    std::vector<Item> items;
    for (int m : cfg.sweep.counts)
        for (int s = 0; s < cfg.run.seeds; ++s) items.push_back({m, s});
    std::vector<std::function<std::string()>> tasks;
    for (const Item& it : items) {
        tasks.emplace_back([&, it]() -> std::string {
            FleetSpec fs = cfg.fleet;
            fs.random->count = it.m;
            // Stream index mixes m and seed so every grid point is independent.
            const Fleet fleet = realize_fleet(
                fs, static_cast<std::uint64_t>(it.m) * 1000003u + static_cast<std::uint64_t>(it.seed));
            const RegimeSolution sol = plan(fleet);
            const SyncSolution sync = synchronized_optimum(fleet.weights(), fleet.efficiencies());
            return join_row({fmt(it.m), fmt(it.seed), fmt(fleet.efficiencies().sum()),
                             sol.plan.regime == Regime::EnergyAdequate ? "adequate" : "scarce",
                             fmt(sol.upper_bound), fmt(sol.asymptote), fmt(sync.value)});
        });
    }
    const std::vector<std::string> rows = run_parallel(jobs, std::move(tasks));
    out.comment("random fleets of size m drawn from fleet.random; objective is normalized");
    out.row({"m", "seed", "sum_b", "regime", "objective", "asymptote", "sync_value"});
    for (const std::string& r : rows) out.raw(r);
}

void run_sweep_efficiency(const ExperimentConfig& cfg, CsvWriter& out, int jobs) {
    if (cfg.sweep.efficiency_scales.empty())
        throw ConfigError("sweep.efficiency_scales must be non-empty");
    if (cfg.fleet.random) throw ConfigError("sweep_efficiency requires an explicit fleet");

    std::vector<std::function<std::string()>> tasks;
    for (double scale : cfg.sweep.efficiency_scales) {
        tasks.emplace_back([&, scale]() -> std::string {
            FleetSpec fs = cfg.fleet;
            fs.efficiencies = cfg.fleet.efficiencies * scale;
            const Fleet fleet = realize_fleet(fs, 0);
            const RegimeSolution sol = plan(fleet);
            return join_row({fmt(scale), fmt(fleet.efficiencies().sum()),
                             sol.plan.regime == Regime::EnergyAdequate ? "adequate" : "scarce",
                             fmt(sol.upper_bound), fmt(sol.lower_bound), fmt(sol.asymptote)});
        });
    }
    const std::vector<std::string> rows = run_parallel(jobs, std::move(tasks));
    out.comment("base efficiencies scaled by 'scale'; objective is normalized");
    out.row({"scale", "sum_b", "regime", "objective", "lower_bound", "asymptote"});
    for (const std::string& r : rows) out.raw(r);
}

void run_sweep_lifetime(const ExperimentConfig& cfg, CsvWriter& out, int jobs) {
    if (cfg.sweep.lifetimes_years.empty())
        throw ConfigError("sweep.lifetimes_years must be non-empty");

    const double joules = cfg.battery.capacity_mah * 1e-3 * 3600.0 * cfg.battery.voltage_v;
    const double p_avg = cfg.battery.tx_power_mw * 1e-3;
    const double replenish = cfg.battery.replenish_mw * 1e-3;
    constexpr double kSecondsPerYear = 365.25 * 24 * 3600;

    std::vector<std::function<std::string()>> tasks;
    for (double years : cfg.sweep.lifetimes_years) {
        tasks.emplace_back([&, years]() -> std::string {
            BatterySpec bat{joules, years * kSecondsPerYear, replenish, p_avg};
            const double b = power_efficiency_from_battery(bat);
            FleetSpec fs = cfg.fleet;
            if (fs.random) {
                fs.random->efficiency_lo = b;
                fs.random->efficiency_hi = b;
            } else {
                fs.efficiencies = Eigen::ArrayXd::Constant(fs.weights.size(), b);
            }
            const Fleet fleet = realize_fleet(fs, 0);
            const RegimeSolution sol = plan(fleet);

            SimConfig sim;
            sim.fleet = fleet;
            sim.tx_dist = resolve_tx_dist(cfg, fleet);
            sim.sensing_time = fleet.sensing_time();
            sim.seed = cfg.run.seed;
            sim.stop = StopRule::cycles(cfg.run.cycles);
            const SimReport report = run_simulation(sim, sol.plan.rates);
            const std::vector<BatterySpec> bats(fleet.size(), bat);
            const EnergyAudit audit = energy_audit(report, fleet, bats);
            const double p_max = bat.initial_energy / bat.target_lifetime + bat.replenish_rate;

            std::string rows;
            for (int i = 0; i < fleet.size(); ++i) {
                rows += join_row({fmt(years), fmt(i), fmt(b), fmt(sol.plan.rates[i]),
                                  fmt(report.per_source[i].empirical_transmit_fraction),
                                  fmt(audit.actual_power[i]), fmt(p_max),
                                  audit.lifetime_met[i] ? "1" : "0"});
                rows += "\n";
            }
            return rows;
        });
    }
    const std::vector<std::string> blocks = run_parallel(jobs, std::move(tasks));
    out.comment("battery budget converted to target efficiency b per lifetime; power in watts");
    out.comment("lifetime_met: 1 when simulated power draw stays within the battery budget");
    out.row({"lifetime_years", "source", "b", "rate", "sim_tx_fraction", "actual_power_w",
             "p_max_w", "lifetime_met"});
    for (const std::string& block : blocks) {
        std::istringstream iss(block);
        std::string line;
        while (std::getline(iss, line)) out.raw(line);
    }
}

void run_compare(const ExperimentConfig& cfg, CsvWriter& out, int jobs) {
    if (!cfg.fleet.random) throw ConfigError("compare_baselines requires fleet.random");

    std::vector<std::function<std::string()>> tasks;
    for (int inst = 0; inst < cfg.run.replications; ++inst) {
        tasks.emplace_back([&, inst]() -> std::string {
            const Fleet fleet = realize_fleet(cfg.fleet, static_cast<std::uint64_t>(inst));
            const RegimeSolution sol = plan(fleet);
            const SleepPlan fixed = fixed_rate_baseline(fleet);
            const double fixed_obj = expected_weighted_peak_age(fleet, fixed.rates).total;
            const SyncSolution sync = synchronized_optimum(fleet.weights(), fleet.efficiencies());
            return join_row({fmt(inst), fmt(fleet.size()), fmt(fleet.efficiencies().sum()),
                             sol.plan.regime == Regime::EnergyAdequate ? "adequate" : "scarce",
                             fmt(sol.upper_bound), fmt(fixed_obj), fmt(sync.value)});
        });
    }
    const std::vector<std::string> rows = run_parallel(jobs, std::move(tasks));
    out.comment("one random instance per row; objectives are normalized weighted avg peak age");
    out.comment("optimal: the planner's rates; fixed_rate: best feasible equal-rate baseline");
    out.row({"instance", "m", "sum_b", "regime", "objective_optimal", "objective_fixed_rate",
             "sync_value"});
    for (const std::string& r : rows) out.raw(r);
}

int run_validate(const std::string& config_path) {
    const ExperimentConfig cfg = parse_config(config_path);
    const Fleet fleet = [&] {
        try {
            return realize_fleet(cfg.fleet, 0);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }();
    const TxTimeDist dist = resolve_tx_dist(cfg, fleet);

    std::cout << "scenario: " << scenario_name(cfg.scenario) << "\n";
    std::cout << "fleet: m=" << fleet.size() << " ts_ratio=" << fmt(fleet.ts_ratio)
              << " mean_tx_time=" << fmt(fleet.mean_tx_time) << " s\n";
    const double sum_b = fleet.efficiencies().sum();
    std::cout << "sum of efficiencies: " << fmt(sum_b) << " -> "
              << (sum_b >= 1.0 ? "energy-adequate regime" : "energy-scarce regime") << "\n";
    if (sum_b < 1.0)
        std::cout << "note: energy-scarce regime; rates are capped by the power budget and the\n"
                     "      channel stays idle a positive fraction of the time\n";
    if (fleet.ts_ratio == 0.0 && sum_b >= 1.0)
        std::cout << "note: ts_ratio = 0 in the energy-adequate regime has no bounded optimal\n"
                     "      plan; solve will fail (raise ts_ratio or lower efficiencies)\n";
    std::cout << "tx_dist mean: " << fmt(dist.mean()) << " s (max " << fmt(dist.max())
              << " s), consistent with declared mean\n";
    std::cout << "config ok\n";
    return kExitOk;
}

int dispatch(Scenario scenario, const ExperimentConfig& cfg, int jobs, bool trace) {
    CsvWriter out(cfg.output);
    switch (scenario) {
        case Scenario::Solve: run_solve(cfg, out); break;
        case Scenario::Simulate: run_simulate(cfg, out, trace); break;
        case Scenario::Learn: run_learn(cfg, out, jobs, trace); break;
        case Scenario::Oracle: run_oracle(cfg, out); break;
        case Scenario::SweepTsRatio: run_sweep_ts_ratio(cfg, out, jobs); break;
        case Scenario::SweepM: run_sweep_m(cfg, out, jobs); break;
        case Scenario::SweepEfficiency: run_sweep_efficiency(cfg, out, jobs); break;
        case Scenario::SweepLifetime: run_sweep_lifetime(cfg, out, jobs); break;
        case Scenario::CompareBaselines: run_compare(cfg, out, jobs); break;
    }
    return kExitOk;
}

bool scenario_matches(const std::string& subcommand, Scenario s) {
    if (subcommand == "solve") return s == Scenario::Solve;
    if (subcommand == "simulate") return s == Scenario::Simulate;
    if (subcommand == "learn") return s == Scenario::Learn;
    if (subcommand == "oracle") return s == Scenario::Oracle;
    if (subcommand == "compare") return s == Scenario::CompareBaselines;
    if (subcommand == "sweep")
        return s == Scenario::SweepTsRatio || s == Scenario::SweepM ||
               s == Scenario::SweepEfficiency || s == Scenario::SweepLifetime;
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"age-optimal sleep-wake scheduling toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int seeds_override = -1;
    int jobs = 0;
    bool trace = false;

    const std::vector<std::string> names = {"solve",   "simulate", "learn",   "sweep",
                                            "compare", "oracle",   "validate"};
    const std::vector<std::string> descriptions = {
        "compute the optimal plan and its certificates",
        "run the event simulator against the analytic model",
        "run certainty-equivalence learning",
        "run a parameter sweep (scenario sweep_*)",
        "compare the plan against baselines on random instances",
        "estimate the oracle cost per step",
        "check a config file without running"};
    for (size_t i = 0; i < names.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--out", out_path, "output path (overrides config 'output')");
        sub->add_option("--seeds", seeds_override, "override run.seeds");
        sub->add_option("--jobs", jobs, "worker threads (default: hardware)");
        sub->add_flag("--trace", trace, "also write an event/learning trace TSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        if (sub == "validate") return run_validate(config_path);

        ExperimentConfig cfg = parse_config(config_path);
        if (!scenario_matches(sub, cfg.scenario))
            throw ConfigError("subcommand '" + sub + "' does not accept scenario '" +
                              scenario_name(cfg.scenario) + "'");
        if (!out_path.empty()) cfg.output = out_path;
        if (seeds_override >= 0) cfg.run.seeds = seeds_override;
        return dispatch(cfg.scenario, cfg, jobs, trace);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NoRootError& e) {
        std::cerr << "numerical error: " << e.what()
                  << " (fleet is energy-scarce; use the scarce-regime path)\n";
        return kExitNumeric;
    } catch (const UnboundedRatesError& e) {
        std::cerr << "numerical error: " << e.what()
                  << " (set ts_ratio > 0 for energy-adequate fleets)\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
