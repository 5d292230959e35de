// Acceptance run: one PASS/FAIL line per criterion, INFO lines for the
// calibrated-radius runs. Exit status is nonzero when any criterion fails.
//
//   acceptance [--calibrated-seeds N] [--calibrated-regret-seeds N] [--no-calibrated]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "checks.hpp"
#include "fairmt/environments.hpp"
#include "fairmt/harness.hpp"
#include "fairmt/learner.hpp"
#include "fairmt/rewards.hpp"

using namespace fairmt;
namespace fs = std::filesystem;

namespace {

// Pinned settings and tolerances.
constexpr double kEpsilon = 0.3;
constexpr double kEpsilon0 = 0.01;
constexpr double kDelta = 0.1;
constexpr std::size_t kEpisodes = 2000;
constexpr std::size_t kSeeds = 30;
constexpr double kViolationFraction = 0.22;  // delta plus binomial 95% slack at 30 seeds
constexpr double kBaselineFraction = 0.5;
constexpr double kOursExcess = 0.10;  // allowed above delta
constexpr std::size_t kRegretSeeds = 20;
constexpr std::size_t kRegretHalf = 4000;  // Reg(2K)/Reg(K) with K = 4000
constexpr double kRegretRatio = 1.9;
constexpr std::size_t kLpInstances = 120;
constexpr double kLpObjectiveTol = 1e-6;
constexpr double kLpFeasibilityTol = 1e-7;
constexpr std::size_t kSandwichInstances = 120;
constexpr double kSandwichTol = 1e-9;
constexpr std::size_t kMcInstances = 10;
constexpr std::size_t kMcRollouts = 1000000;
constexpr double kMcStandardErrors = 3.0;
constexpr std::size_t kRowInstances = 60;
constexpr double kRowTol = 1e-6;
constexpr std::size_t kGoodEventRuns = 200;
constexpr std::size_t kGoodEventEpisodes = 500;
constexpr double kCalibratedScale = 2e-4;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("%s [%s] %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

void info(const std::string& name, const std::string& detail) {
    std::printf("INFO [%s] %s\n", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

FairnessConfig riverswim_config(const TaskedGroupMDP& mdp, std::size_t episodes, double scale) {
    FairnessConfig cfg;
    cfg.epsilon = kEpsilon;
    cfg.epsilon0 = kEpsilon0;
    cfg.delta = kDelta;
    cfg.n_episodes = episodes;
    cfg.radius_scale = scale;
    cfg.pi0 = TimedPolicySet(mdp.n_groups(), TimedPolicy::constant_action(mdp.shape, RiverSwimSpec::left));
    return cfg;
}

struct SeedStats {
    bool any_violation = false;            // some episode, some task
    std::vector<bool> task_violation;      // per task
    std::size_t fallback = 0;
    std::vector<double> summed_regret;     // cumulative, per episode
};

SeedStats stats(const RunResult& run, std::size_t n_tasks) {
    SeedStats s;
    s.task_violation.assign(n_tasks, false);
    double acc = 0.0;
    for (const auto& rec : run.records) {
        for (std::size_t m = 0; m < n_tasks; ++m)
            if (rec.max_gap_for_task(m, 1) > kEpsilon) s.task_violation[m] = s.any_violation = true;
        if (rec.mode == PlanMode::fallback) ++s.fallback;
        for (double r : rec.regret) acc += r;
        s.summed_regret.push_back(acc);
    }
    return s;
}

struct Batch {
    std::vector<SeedStats> seeds;
    double fraction_any() const {
        return double(std::count_if(seeds.begin(), seeds.end(), [](const SeedStats& s) { return s.any_violation; })) /
               double(seeds.size());
    }
    double fraction_task(std::size_t m) const {
        return double(std::count_if(seeds.begin(), seeds.end(),
                                    [m](const SeedStats& s) { return bool(s.task_violation[m]); })) /
               double(seeds.size());
    }
    double mean_fallback(std::size_t episodes) const {
        double acc = 0.0;
        for (const auto& s : seeds) acc += double(s.fallback) / double(episodes);
        return acc / double(seeds.size());
    }
    // mean over seeds of Reg(2K)/Reg(K)
    double mean_ratio(std::size_t half) const {
        double acc = 0.0;
        for (const auto& s : seeds) acc += s.summed_regret[2 * half - 1] / s.summed_regret[half - 1];
        return acc / double(seeds.size());
    }
};

Batch run_batch(const TaskedGroupMDP& mdp, const FairnessConfig& cfg, const RegretOracle& oracle, std::size_t n_seeds,
                bool baseline) {
    Batch b;
    for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
        const RunResult run = baseline ? run_baseline(mdp, cfg, 0, seed, oracle) : run_learner(mdp, cfg, seed, oracle);
        b.seeds.push_back(stats(run, mdp.n_tasks));
    }
    return b;
}

// Largest optimistic-minus-pessimistic spread of pi0 over tasks and ordered
// pairs after a run: the quantity the fallback test compares with (eps+eps0)/2.
double pi0_spread_after(const TaskedGroupMDP& mdp, const FairnessConfig& cfg, const RegretOracle& oracle) {
    FairLearner learner(mdp, cfg, 1);
    const DenseSimplex backend;
    for (std::size_t k = 0; k < cfg.n_episodes; ++k) learner.step(oracle, backend);
    const auto v = reward_variants(learner.estimator(), cfg.epsilon, cfg.epsilon0, cfg.alpha_rule);
    double worst = 0.0;
    for (std::size_t m = 0; m < mdp.n_tasks; ++m)
        for (std::size_t i = 0; i < mdp.n_groups(); ++i)
            for (std::size_t j = 0; j < mdp.n_groups(); ++j) {
                if (i == j) continue;
                const double up = evaluate_under_estimate(cfg.pi0[i], mdp.groups[i].initial_dist, learner.estimator(),
                                                          i, v.optimistic, m);
                const double low = evaluate_under_estimate(cfg.pi0[j], mdp.groups[j].initial_dist,
                                                           learner.estimator(), j, v.pessimistic, m);
                worst = std::max(worst, up - low);
            }
    return worst;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool identical_reruns(ExperimentPlan plan, const fs::path& root, std::size_t& compared) {
    plan.out_dir = root / "first";
    const auto a = run_experiment(plan);
    plan.out_dir = root / "second";
    const auto b = run_experiment(plan);
    bool same = true;
    for (std::size_t i = 0; i < a.seeds.size(); ++i) {
        const std::string x = slurp(a.seeds[i].csv);
        same = same && !x.empty() && x == slurp(b.seeds[i].csv);
        ++compared;
    }
    return same && slurp(a.summary) == slurp(b.summary);
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t calibrated_seeds = 10, calibrated_regret_seeds = 3;
    bool calibrated = true;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--no-calibrated") calibrated = false;
        else if (arg == "--calibrated-seeds" && i + 1 < argc) calibrated_seeds = std::strtoul(argv[++i], nullptr, 10);
        else if (arg == "--calibrated-regret-seeds" && i + 1 < argc)
            calibrated_regret_seeds = std::strtoul(argv[++i], nullptr, 10);
        else {
            std::fprintf(stderr, "usage: %s [--calibrated-seeds N] [--calibrated-regret-seeds N] [--no-calibrated]\n",
                         argv[0]);
            return 2;
        }
    }
    const auto start = std::chrono::steady_clock::now();

    const TaskedGroupMDP river = build_riverswim_multitask({});
    const RegretOracle oracle = compute_fair_optimum(river, kEpsilon);
    info("setup", fmt("RiverSwim H=20, eps=%g, eps0=%g, delta=%g; fair optimum %.6f (max gap %.6f)", kEpsilon,
                      kEpsilon0, kDelta, oracle.objective, oracle.max_gap));

    // 1 and 2: textbook radius
    const FairnessConfig textbook = riverswim_config(river, kEpisodes, 1.0);
    const Batch ours = run_batch(river, textbook, oracle, kSeeds, false);
    const Batch base = run_batch(river, textbook, oracle, kSeeds, true);
    report(ours.fraction_any() <= kViolationFraction, "1 zero violation",
           fmt("%zu seeds x K=%zu: fraction of seeds with an episode gap > eps = %.3f (bound %.2f); "
               "mean fallback share %.3f",
               kSeeds, kEpisodes, ours.fraction_any(), kViolationFraction, ours.mean_fallback(kEpisodes)));
    const bool contrast = base.fraction_task(1) >= kBaselineFraction && ours.fraction_task(1) <= kDelta + kOursExcess;
    report(contrast, "2 baseline contrast",
           fmt("second-task violation: baseline %.3f of seeds (need >= %.2f), ours %.3f (need <= %.2f); "
               "baseline fallback share %.3f",
               base.fraction_task(1), kBaselineFraction, ours.fraction_task(1), kDelta + kOursExcess,
               base.mean_fallback(kEpisodes)));

    // 3: Reg(2K)/Reg(K), K = 4000, so every run is 8000 episodes long
    const FairnessConfig long_textbook = riverswim_config(river, 2 * kRegretHalf, 1.0);
    const Batch regret = run_batch(river, long_textbook, oracle, kRegretSeeds, false);
    report(regret.mean_ratio(kRegretHalf) < kRegretRatio, "3 sublinear regret",
           fmt("%zu seeds: mean Reg(%zu)/Reg(%zu) = %.4f (need < %.2f); mean fallback share %.3f", kRegretSeeds,
               2 * kRegretHalf, kRegretHalf, regret.mean_ratio(kRegretHalf), kRegretRatio,
               regret.mean_fallback(2 * kRegretHalf)));
    info("3 textbook radius",
         fmt("pi0 upper-lower spread after %zu episodes = %.1f; the fallback test needs <= %.3f",
             kEpisodes, pi0_spread_after(river, textbook, oracle), 0.5 * (kEpsilon + kEpsilon0)));

    // 4
    const auto lp = checks::lp_oracle_agreement(kLpInstances, 2024);
    report(lp.instances >= 100 && lp.status_mismatches == 0 && lp.max_objective_diff <= kLpObjectiveTol &&
               lp.max_violation <= kLpFeasibilityTol,
           "4 LP oracle",
           fmt("%zu instances (%zu optimal), %zu status mismatches, max |obj diff| %.2e (<= %.0e), "
               "max violation %.2e (<= %.0e)",
               lp.instances, lp.optimal, lp.status_mismatches, lp.max_objective_diff, kLpObjectiveTol,
               lp.max_violation, kLpFeasibilityTol));

    // 5
    const auto sw = checks::return_sandwich(kSandwichInstances, 2025);
    const double worst_slack =
        std::min({sw.optimistic_slack, sw.pessimistic_slack, sw.upper_gap_slack, sw.lower_gap_slack});
    report(kSandwichInstances >= 100 && worst_slack >= -kSandwichTol, "5 return sandwich",
           fmt("%zu instances, %zu policy cases, smallest slack %.3e (>= -%.0e)", kSandwichInstances, sw.cases,
               worst_slack, kSandwichTol));

    // 6
    const auto mc = checks::monte_carlo_agreement(kMcInstances, kMcRollouts, 2026);
    const auto rows = checks::occupancy_row_agreement(kRowInstances, 2027);
    report(mc.instances == kMcInstances && mc.max_z <= kMcStandardErrors && rows.rows > 0 &&
               rows.max_diff <= kRowTol && rows.max_objective_diff <= kRowTol,
           "6 evaluation cross-check",
           fmt("Monte Carlo: %zu instances x %zu rollouts, max %.2f standard errors (<= %.0f); LP rows: %zu rows, "
               "max diff %.2e, objective diff %.2e (<= %.0e)",
               mc.instances, kMcRollouts, mc.max_z, kMcStandardErrors, rows.rows, rows.max_diff,
               rows.max_objective_diff, kRowTol));

    // 7
    const auto ge = checks::good_event_frequency(kGoodEventRuns, kGoodEventEpisodes, kDelta, 2028);
    report(ge.runs == kGoodEventRuns && ge.rate() <= kDelta, "7 good event",
           fmt("%zu runs x %zu episodes: %zu failures, rate %.3f (<= %.2f)", ge.runs, kGoodEventEpisodes, ge.failures,
               ge.rate(), kDelta));

    // 8: the default RiverSwim run plus a small instance that plans with LPs
    const fs::path root = fs::temp_directory_path() / "fairmt_acceptance_determinism";
    fs::remove_all(root);
    std::size_t compared = 0;
    ExperimentPlan p1;
    p1.mdp = river;
    p1.seeds = {1, 2, 3};
    p1.cfg = riverswim_config(river, kEpisodes, 1.0);
    ExperimentPlan p2;
    p2.mdp = river;
    p2.seeds = {4, 5};
    p2.cfg = riverswim_config(river, 300, 1e-4);
    ExperimentPlan p3;
    p3.mdp = random_small_mdp({3, 2, 3, 2, 2}, 2);
    const auto safe = default_safe_policy(p3.mdp);
    p3.seeds = {6, 7, 8};
    p3.parallel = 3;
    p3.cfg.epsilon = 0.4;
    p3.cfg.epsilon0 = safe.certified_gap;
    p3.cfg.pi0 = safe.policies;
    p3.cfg.n_episodes = 500;
    p3.cfg.radius_scale = 0.01;
    const bool deterministic = identical_reruns(p1, root / "a", compared) &&
                               identical_reruns(p2, root / "b", compared) &&
                               identical_reruns(p3, root / "c", compared);
    fs::remove_all(root);
    report(deterministic, "8 determinism", fmt("%zu seed CSVs and their summaries rerun byte-identical", compared));

    info("time", fmt("criteria finished after %.0f s", seconds_since(start)));

    if (calibrated) try {
        // Same runs with every confidence radius scaled down, where the learner
        // actually leaves the fallback policy. Reported, not judged.
        const std::string tag = fmt("radius scale %g", kCalibratedScale);
        const FairnessConfig cal = riverswim_config(river, kEpisodes, kCalibratedScale);
        const Batch cal_ours = run_batch(river, cal, oracle, calibrated_seeds, false);
        info("1 " + tag, fmt("%zu seeds: fraction with an episode gap > eps = %.3f (bound %.2f); first task %.3f, "
                             "second task %.3f; mean fallback share %.3f",
                             calibrated_seeds, cal_ours.fraction_any(), kViolationFraction, cal_ours.fraction_task(0),
                             cal_ours.fraction_task(1), cal_ours.mean_fallback(kEpisodes)));
        const Batch cal_base = run_batch(river, cal, oracle, calibrated_seeds, true);
        info("2 " + tag, fmt("second-task violation: baseline %.3f of seeds, ours %.3f; first-task violation: "
                             "baseline %.3f; baseline fallback share %.3f",
                             cal_base.fraction_task(1), cal_ours.fraction_task(1), cal_base.fraction_task(0),
                             cal_base.mean_fallback(kEpisodes)));
        const Batch cal_regret =
            run_batch(river, riverswim_config(river, 2 * kRegretHalf, kCalibratedScale), oracle,
                      calibrated_regret_seeds, false);
        info("3 " + tag, fmt("%zu seeds: mean Reg(%zu)/Reg(%zu) = %.4f; mean fallback share %.3f",
                             calibrated_regret_seeds, 2 * kRegretHalf, kRegretHalf, cal_regret.mean_ratio(kRegretHalf),
                             cal_regret.mean_fallback(2 * kRegretHalf)));
        info("time", fmt("calibrated runs finished after %.0f s", seconds_since(start)));
    } catch (const std::exception& e) {
        info("calibrated", std::string("stopped: ") + e.what());
    }

    std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "PASSED", failures);
    return failures ? 1 : 0;
}
