// Acceptance suite: one pass/fail line per criterion, tolerances pinned
// inline. Exit code is the number of failed criteria.

#include "agewake/learner.hpp"
#include "agewake/planner.hpp"
#include "agewake/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace agewake;

namespace {

int failures = 0;
std::chrono::steady_clock::time_point t0;

void begin() { t0 = std::chrono::steady_clock::now(); }

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %2d  %-34s %s  [%.1fs]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str(), secs);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Eigen::ArrayXd draw(Rng& rng, int n, double lo, double hi) {
    Eigen::ArrayXd out(n);
    for (int i = 0; i < n; ++i) out[i] = std::max(lo + (hi - lo) * rng.uniform01(), 1e-9);
    return out;
}

// Random (w, b) with sum(b) conditioned on the regime.
Fleet random_fleet(Rng& rng, int m, bool adequate, double ts_ratio) {
    Eigen::ArrayXd w = draw(rng, m, 0.1, 10.0);
    Eigen::ArrayXd b = draw(rng, m, 0.02, 1.0);
    if (adequate) {
        if (b.sum() < 1.0) b *= (1.0 + rng.uniform01()) / b.sum();
    } else {
        b *= (0.1 + 0.8 * rng.uniform01()) / b.sum();
        b = b.max(1e-3);
        if (b.sum() >= 0.98) b *= 0.95 / b.sum();
    }
    return make_fleet(w, b, ts_ratio);
}

SimConfig sim_config(const Fleet& fleet, long cycles, std::uint64_t seed) {
    SimConfig c;
    c.fleet = fleet;
    c.tx_dist = TxTimeDist::deterministic(fleet.mean_tx_time);
    c.sensing_time = fleet.sensing_time();
    c.seed = seed;
    c.stop = StopRule::cycles(cycles);
    return c;
}

// -- 1 ----------------------------------------------------------------------
void criterion_1() {
    begin();
    Rng rng(1001);
    double worst = 0;
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::ArrayXd w = draw(rng, 3, 0.0, 10.0);
        Eigen::ArrayXd b = draw(rng, 3, 0.0, 1.0);
        const Fleet f = make_fleet(w, b, 0.008);
        const RegimeSolution s = plan(f);
        const SimReport r = run_simulation(sim_config(f, 500000, 11 + trial), s.plan.rates);
        const double analytic = expected_weighted_peak_age(f, s.plan.rates).total_seconds;
        worst = std::max(worst,
                         std::abs(r.weighted_avg_peak_age - analytic) / analytic);
    }
    report(1, "analytic-simulation agreement", worst <= 0.02,
           "max rel err " + fmt(worst) + " (tol 2%)");
}

// -- 2 ----------------------------------------------------------------------
void criterion_2() {
    begin();
    Rng rng(1002);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + static_cast<int>(rng.uniform01() * 100);
        const Fleet f = random_fleet(rng, m, true, 0.01);
        const Eigen::ArrayXd w = f.weights(), b = f.efficiencies();
        const double beta = solve_beta_star(w, b);
        if (b.sum() <= 1.0 + 1e-12) continue;  // boundary: root set is a ray
        worst = std::max(worst, std::abs(b.min(beta * w.sqrt()).sum() - 1.0));
    }
    report(2, "beta-star residual", worst <= 1e-12,
           "max residual " + fmt(worst) + " (tol 1e-12)");
}

// -- 3 ----------------------------------------------------------------------
void criterion_3() {
    begin();
    Rng rng(1003);
    double worst = -1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        for (const double eps : {0.0, 1e-4, 1e-2}) {
            for (const bool adequate : {false, true}) {
                if (adequate && eps == 0.0) continue;  // no bounded adequate plan at eps=0
                const int m = 1 + static_cast<int>(rng.uniform01() * 10);
                const Fleet f = random_fleet(rng, m, adequate, eps);
                const Eigen::ArrayXd sigma =
                    transmit_fractions(plan(f).plan.rates, f.ts_ratio);
                worst = std::max(worst, (sigma - f.efficiencies()).maxCoeff());
            }
        }
    }
    report(3, "plan energy feasibility", worst <= 1e-12,
           "max constraint violation " + fmt(worst) + " (tol 1e-12)");
}

// -- 4 ----------------------------------------------------------------------
void criterion_4() {
    begin();
    Rng rng(1004);
    bool ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const double eps = std::pow(10.0, -4.0 + 2.0 * rng.uniform01());
        const Fleet f = random_fleet(rng, 1 + static_cast<int>(rng.uniform01() * 8),
                                     trial % 2 == 0, eps);
        const RegimeSolution s = plan(f);
        ok = ok && s.lower_bound <= s.upper_bound + 1e-12;
        ok = ok && std::abs(s.upper_bound - expected_weighted_peak_age(f, s.plan.rates).total) <=
                       1e-10 * std::max(1.0, s.upper_bound);
    }
    // The brute-force grid is logarithmic, so its best feasible point can sit
    // up to one multiplicative step inside the energy boundary; allow the
    // upper comparison that one-step resolution slack.
    const int grid_points = 120;
    const double grid_step = std::pow(10.0, 4.0 / (grid_points - 1)) - 1.0;
    double grid_margin = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const Fleet f = random_fleet(rng, 2, trial % 2 == 0, 1e-4);
        const RegimeSolution s = plan(f);
        const GridResult g = grid_oracle(f, grid_points);
        ok = ok && g.best_objective >= s.lower_bound - 1e-12;
        ok = ok && g.best_objective <= s.upper_bound * (1.0 + grid_step);
        grid_margin = std::max(grid_margin,
                               (g.best_objective - s.upper_bound) / s.upper_bound);
    }
    report(4, "bound sandwich", ok,
           "grid-vs-upper margin " + fmt(grid_margin) + " (grid resolution tol " +
               fmt(grid_step) + ")");
}

// -- 5 ----------------------------------------------------------------------
void criterion_5() {
    begin();
    Rng rng(1005);
    double worst_adequate = 0, worst_scarce = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const double eps = std::pow(10.0, -5.0 + 2.0 * rng.uniform01());  // <= 1e-3
        const RegimeSolution a = plan(random_fleet(rng, 5, true, eps));
        worst_adequate = std::max(worst_adequate,
                                  (a.upper_bound - a.lower_bound) / a.gap_bound);
        const RegimeSolution s = plan(random_fleet(rng, 5, false, eps));
        worst_scarce = std::max(worst_scarce, (s.upper_bound - s.lower_bound) / s.gap_bound);
    }
    report(5, "theorem gap bounds", worst_adequate <= 1.2 && worst_scarce <= 1.5,
           "gap/bound adequate " + fmt(worst_adequate) + " (tol 1.2), scarce " +
               fmt(worst_scarce) + " (tol 1.5)");
}

// -- 6 ----------------------------------------------------------------------
void criterion_6() {
    begin();
    Rng rng(1006);
    bool ok = true;
    double worst_final = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Fleet base = random_fleet(rng, 4, trial % 2 == 0, 0.01);
        double prev = 1e300, final_gap = 0;
        for (const double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
            Fleet f = base;
            f.ts_ratio = eps;
            const RegimeSolution s = plan(f);
            ok = ok && s.upper_bound <= prev + 1e-12;
            prev = s.upper_bound;
            final_gap = (s.upper_bound - s.asymptote) / s.asymptote;
        }
        ok = ok && final_gap <= 0.01 && final_gap >= -1e-12;
        worst_final = std::max(worst_final, final_gap);
    }
    report(6, "asymptotic convergence", ok,
           "monotone; final rel gap " + fmt(worst_final) + " (tol 1%)");
}

// -- 7 ----------------------------------------------------------------------
void criterion_7() {
    begin();
    Rng rng(1007);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Fleet f = random_fleet(rng, 1 + static_cast<int>(rng.uniform01() * 10),
                                     trial % 2 == 0, 0.01);
        const double asym = plan(f).asymptote;
        const double sync = synchronized_optimum(f.weights(), f.efficiencies()).value;
        worst = std::max(worst, std::abs(sync - asym) / std::max(1.0, std::abs(asym)));
    }
    report(7, "synchronized equivalence", worst <= 1e-10,
           "max |sync - asymptote| " + fmt(worst) + " rel (tol 1e-10)");
}

// -- 8 ----------------------------------------------------------------------
void criterion_8() {
    begin();
    Rng rng(1008);
    double worst = 0;
    for (int trial = 0; trial < 6; ++trial) {
        const bool adequate = trial % 2 == 0;
        const Eigen::ArrayXd w = draw(rng, 2, 0.1, 10.0);
        // Keep the total scarce budget moderate: near-empty budgets push the
        // optimum against the feasibility boundary, where the comparison is
        // limited by the 200-point grid resolution rather than by the plan.
        const Eigen::ArrayXd b =
            adequate ? draw(rng, 2, 0.55, 0.95) : draw(rng, 2, 0.40, 0.49);
        const Fleet f = make_fleet(w, b, 1e-4);
        const RegimeSolution s = plan(f);
        const GridResult g = grid_oracle(f, 200);
        worst = std::max(worst,
                         std::abs(s.upper_bound - g.best_objective) / s.asymptote);
    }
    report(8, "near-optimality vs brute force", worst <= 0.01,
           "max |plan - grid|/asymptote " + fmt(worst) + " (tol 1%)");
}

// -- 9 ----------------------------------------------------------------------
void criterion_9() {
    begin();
    const Eigen::ArrayXd rates = [] {
        Eigen::ArrayXd r(3);
        r << 0.8, 1.6, 0.5;
        return r;
    }();
    const Fleet f = make_fleet(Eigen::ArrayXd::Constant(3, 1.0),
                               Eigen::ArrayXd::Constant(3, 1.0), 0.008);
    const long n = 400000;
    const SimReport r = run_simulation(sim_config(f, n, 9009), rates);
    const Eigen::ArrayXd alpha = access_probabilities(rates, 0.008);
    const Eigen::ArrayXd sigma = transmit_fractions(rates, 0.008);
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const double sd = std::sqrt(alpha[i] * (1 - alpha[i]) / r.cycles);
        ok = ok && std::abs(r.per_source[i].empirical_access_prob - alpha[i]) <= 4 * sd;
        ok = ok && std::abs(r.per_source[i].empirical_transmit_fraction - sigma[i]) <=
                       0.02 * sigma[i];
        // cycles between wins: geometric, mean 1/alpha, var (1-alpha)/alpha^2
        const double wins = static_cast<double>(r.per_source[i].deliveries);
        const double mean_gap = static_cast<double>(r.cycles) / wins;
        const double se = std::sqrt((1 - alpha[i]) / (alpha[i] * alpha[i]) / wins);
        ok = ok && std::abs(mean_gap - 1 / alpha[i]) <= 4 * se;
    }
    // exact per-delivery peak decomposition
    CycleEngine engine(f.mean_tx_time / rates, f.sensing_time(),
                       TxTimeDist::uniform(0.5, 1.5), Rng(42));
    for (int i = 0; i < 50000; ++i) {
        const CycleOutcome c = engine.step();
        if (!c.collision && !std::isnan(c.prev_service))
            ok = ok && c.peak == c.prev_service + c.inter_departure;
    }
    report(9, "simulator micro-invariants", ok,
           "alpha 4-sigma, sigma 2%, gap 4-sigma, exact peak identity");
}

// -- 10 ---------------------------------------------------------------------
void criterion_10() {
    begin();
    Rng rng(1010);
    bool ok = true;
    double worst = 0;
    // Small sensing ratio: dominance over the strongest feasible uniform-rate
    // baseline is an asymptotic property; at large sensing ratios the two sit
    // within each other's near-optimality gap.
    for (int trial = 0; trial < 100; ++trial) {
        const Fleet f = random_fleet(rng, 1 + static_cast<int>(rng.uniform01() * 6),
                                     trial % 2 == 0, 1e-4);
        const RegimeSolution s = plan(f);
        const SleepPlan base = fixed_rate_baseline(f);
        const double base_obj = expected_weighted_peak_age(f, base.rates).total;
        ok = ok && s.upper_bound <= base_obj + 1e-9;
        worst = std::max(worst, s.upper_bound - base_obj);
    }
    report(10, "baseline dominance", ok,
           "plan <= fixed-rate on every instance (margin " + fmt(worst) + ")");
}

// -- 11 ---------------------------------------------------------------------
void criterion_11() {
    begin();
    // 8 mAh at 5 V = 144 J, 24.75 mW transmit power, no replenishment.
    // The plan is budget-tight by construction, so the empirical transmit
    // fraction is tested against the budget with a pinned 6/sqrt(cycles)
    // one-sided sampling allowance (about 1% at the cycle count below).
    constexpr double kJoules = 8e-3 * 3600.0 * 5.0;
    constexpr double kPAvg = 24.75e-3;
    constexpr double kYear = 365.25 * 24 * 3600;
    const long cycles = 300000;
    const double stat_tol = 6.0 / std::sqrt(static_cast<double>(cycles));
    Rng rng(1011);
    bool ok = true;
    double worst = -1e300;
    for (const double years : {5.0, 10.0, 15.0}) {
        const BatterySpec bat{kJoules, years * kYear, 0.0, kPAvg};
        const double b = power_efficiency_from_battery(bat);
        const Fleet f = make_fleet(draw(rng, 3, 0.1, 10.0),
                                   Eigen::ArrayXd::Constant(3, b), 0.01);
        const RegimeSolution s = plan(f);
        const SimReport r = run_simulation(sim_config(f, cycles, 1100 + long(years)),
                                           s.plan.rates);
        const EnergyAudit audit = energy_audit(r, f, std::vector<BatterySpec>(3, bat));
        const double p_max = bat.initial_energy / bat.target_lifetime;
        for (int i = 0; i < 3; ++i) {
            const double rel = audit.actual_power[i] / p_max - 1.0;
            worst = std::max(worst, rel);
            ok = ok && rel <= stat_tol;
        }
    }
    report(11, "battery lifetime property", ok,
           "max power excess " + fmt(worst) + " rel (tol " + fmt(stat_tol) +
               " = 6/sqrt(cycles), plan is budget-tight)");
}

// -- 12 ---------------------------------------------------------------------
LearnConfig learn_base(std::uint64_t seed, long horizon) {
    LearnConfig c;
    c.true_dist = TxTimeDist::uniform(0.5, 1.5);  // theta* = 1
    c.weights = Eigen::ArrayXd::Constant(2, 1.0);
    c.weights[1] = 2.0;
    c.efficiencies = Eigen::ArrayXd::Constant(2, 0.6);
    c.sensing_time = 0.01;
    c.horizon = horizon;
    c.seed = seed;
    return c;
}

void criterion_12() {
    begin();
    const long horizon = 1L << 16;
    const int seeds = 20;

    // (a) estimator consistency; (b) paired regret vs the true-mean policy
    std::vector<double> errs;
    std::vector<long> checkpoints;
    for (long h = 1L << 10; h <= horizon; h *= 2) checkpoints.push_back(h);
    std::vector<double> mean_regret(checkpoints.size(), 0.0);
    for (int s = 0; s < seeds; ++s) {
        LearnConfig lc = learn_base(Rng::split(120, s).next_u64(), horizon);
        const LearnTrace learner = run_ce_learning(lc);
        errs.push_back(std::abs(learner.theta_series.back().second - 1.0));

        LearnConfig oc = lc;
        oc.pinned_theta = 1.0;  // same seed: paired, common-random-number baseline
        const LearnTrace oracle = run_ce_learning(oc);
        for (size_t k = 0; k < checkpoints.size(); ++k) {
            const size_t i = static_cast<size_t>(checkpoints[k] - 1);
            mean_regret[k] += (learner.cumulative_cost[i] - oracle.cumulative_cost[i]) / seeds;
        }
    }
    std::sort(errs.begin(), errs.end());
    const double median_err = (errs[9] + errs[10]) / 2;
    const bool pass_a = median_err <= 0.02;
    report(12, "learning: estimator consistency", pass_a,
           "median |theta - theta*| " + fmt(median_err) + " (tol 0.02)");

    // least-squares slope of log mean R(H) vs log H over positive points
    begin();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (size_t k = 0; k < checkpoints.size(); ++k) {
        if (mean_regret[k] <= 0) continue;  // nonpositive regret: sublinear trivially
        const double x = std::log(static_cast<double>(checkpoints[k]));
        const double y = std::log(mean_regret[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    double slope = 0;
    if (pts >= 2) slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    const bool pass_b = pts < 2 || slope <= 0.75;
    report(12, "learning: regret sublinearity", pass_b,
           "log-log slope of mean R(H) " + fmt(slope) + " (tol 0.75, " +
               std::to_string(pts) + " positive points)");

    // (c) oracle self-regret: mean R(H)/H within 3 sigma of 0 over 50 seeds
    begin();
    const long h = 1L << 14;
    LearnConfig jc = learn_base(Rng::split(121, 9999).next_u64(), h);
    jc.pinned_theta = 1.0;
    const long j_steps = 3000000;
    const double j = oracle_cost_per_step(jc, j_steps);
    std::vector<double> per_step;
    for (int s = 0; s < 50; ++s) {
        LearnConfig oc = learn_base(Rng::split(121, s).next_u64(), h);
        oc.pinned_theta = 1.0;
        per_step.push_back(run_ce_learning(oc).cumulative_cost.back() / h);
    }
    double mean = 0, var = 0;
    for (double x : per_step) mean += x / per_step.size();
    for (double x : per_step) var += (x - mean) * (x - mean) / (per_step.size() - 1);
    // sigma combines the seed-mean error with the baseline's own MC error
    const double sigma = std::sqrt(var / per_step.size() + var * h / j_steps);
    const bool pass_c = std::abs(mean - j) <= 3 * sigma;
    report(12, "learning: oracle self-regret", pass_c,
           "mean R(H)/H " + fmt(mean - j) + " vs 3-sigma " + fmt(3 * sigma));
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);  // keep per-line output on abort
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    std::printf("%s: %d criterion check(s) failed\n", failures == 0 ? "OK" : "FAILED",
                failures);
    return failures;
}
