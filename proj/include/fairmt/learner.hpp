#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairmt/estimation.hpp"
#include "fairmt/evaluation.hpp"
#include "fairmt/mdp.hpp"
#include "fairmt/oracle.hpp"
#include "fairmt/planner.hpp"
#include "fairmt/random.hpp"

namespace fairmt {

/// Which groups produce a trajectory in an episode.
enum class SamplingSchedule {
    all_groups,   // one trajectory per group every episode
    round_robin,  // only group (k mod |Z|) in episode k
};

struct FairnessConfig {
    double epsilon = 0.3;   // fairness tolerance, in (0, H]
    double epsilon0 = 0.0;  // certified gap of pi0, in [0, epsilon)
    TimedPolicySet pi0;     // strictly fair initial policy list
    double delta = 0.1;
    std::size_t n_episodes = 1;
    AlphaRule alpha_rule = AlphaRule::base;
    /// Multiplies every confidence radius; 1 is the textbook radius.
    double radius_scale = 1.0;
    SamplingSchedule schedule = SamplingSchedule::all_groups;
};

/// Throws ConfigError-like std::invalid_argument for malformed configs. When the
/// true model is supplied, also checks that pi0's true gap is within epsilon0.
void validate_config(const FairnessConfig& cfg, const TaskedGroupMDP& mdp);

struct SafePolicy {
    TimedPolicySet policies;
    double certified_gap = 0.0;  // true max gap over tasks and pairs
};

/// Picks, among the constant-action policies and the uniform policy (shared by
/// all groups), the one with the smallest true max fairness gap. Lower action
/// indices win ties; uniform is tried last.
SafePolicy default_safe_policy(const TaskedGroupMDP& mdp);

struct EpisodeRecord {
    std::size_t episode = 0;  // 1-based
    PlanMode mode = PlanMode::fallback;
    ReturnTable returns;         // true returns [task][group] of the played policy list
    std::vector<double> gaps;    // true gaps [task][pair]
    std::vector<double> regret;  // per-task regret increment vs. the fair optimum, summed over groups
    double duration_seconds = 0.0;

    double max_gap() const;
    double max_gap_for_task(std::size_t m, std::size_t n_pairs) const;

    /// Compares everything except the wall-clock duration.
    bool operator==(const EpisodeRecord& other) const;
};

struct RunSummary {
    std::vector<double> cumulative_regret;  // per task
    std::vector<double> max_gap;            // per task, over all episodes
    std::size_t fallback_episodes = 0;
    std::size_t lp_anomalies = 0;
    std::uint64_t seed = 0;

    bool operator==(const RunSummary&) const = default;
};

struct RunResult {
    std::vector<EpisodeRecord> records;
    RunSummary summary;
};

/// One learner instance. It reads the true MDP only to sample trajectories and
/// to score the played policies; planning sees the estimator, the initial
/// distributions and pi0.
class FairLearner {
public:
    /// `tasks` are the constrained and rewarded tasks (all tasks when empty).
    FairLearner(const TaskedGroupMDP& mdp, FairnessConfig cfg, std::uint64_t seed,
                std::vector<std::size_t> tasks = {});

    /// Plans, executes and updates for one episode.
    EpisodeRecord step(const RegretOracle& oracle, const LpBackend& backend, const LpObserver& observer = {});

    std::size_t episodes_done() const { return episode_; }
    const EstimatorState& estimator() const { return est_; }
    const RunSummary& summary() const { return summary_; }
    const FairnessConfig& config() const { return cfg_; }

    /// Structured-text (JSON) checkpoint of the estimator, episode index,
    /// random state and running summary.
    std::string checkpoint() const;
    static FairLearner resume(const TaskedGroupMDP& mdp, FairnessConfig cfg, const std::string& checkpoint,
                              std::vector<std::size_t> tasks = {});

private:
    const TaskedGroupMDP* mdp_;
    FairnessConfig cfg_;
    PlannerConfig planner_;
    std::vector<std::vector<double>> initial_;
    EstimatorState est_;
    Rng rng_;
    std::size_t episode_ = 0;
    RunSummary summary_;
};

RunResult run_learner(const TaskedGroupMDP& mdp, const FairnessConfig& cfg, std::uint64_t seed,
                      const std::optional<RegretOracle>& oracle = std::nullopt);

/// Single-task group-fair baseline: constraints and objective use only
/// `constrained_task`; records still report every task.
RunResult run_baseline(const TaskedGroupMDP& mdp, const FairnessConfig& cfg, std::size_t constrained_task,
                       std::uint64_t seed, const std::optional<RegretOracle>& oracle = std::nullopt);

}  // namespace fairmt
