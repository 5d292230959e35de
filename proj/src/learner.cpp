#include "fairmt/learner.hpp"

#include <algorithm>
#include <chrono>

#include "json.hpp"

namespace fairmt {

using json = nlohmann::json;

void validate_config(const FairnessConfig& cfg, const TaskedGroupMDP& mdp) {
    const double horizon = static_cast<double>(mdp.shape.horizon);
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= horizon))
        throw std::invalid_argument("epsilon must lie in (0, H]");
    if (!(cfg.epsilon0 >= 0.0 && cfg.epsilon0 < cfg.epsilon))
        throw std::invalid_argument("epsilon0 must lie in [0, epsilon)");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (cfg.n_episodes == 0) throw std::invalid_argument("at least one episode is required");
    if (!(cfg.radius_scale > 0.0)) throw std::invalid_argument("radius scale must be positive");
    if (mdp.n_tasks == 0) throw std::invalid_argument("at least one task is required");
    check_policy_shape(mdp, cfg.pi0);
    for (const auto& p : cfg.pi0)
        if (!p.is_valid()) throw std::invalid_argument("pi0 rows must be probability distributions");
    const double gap = fairness_gaps(mdp, cfg.pi0).max_gap;
    if (gap > cfg.epsilon0 + 1e-12)
        throw std::invalid_argument("pi0 has true fairness gap " + std::to_string(gap) + " above epsilon0");
}

SafePolicy default_safe_policy(const TaskedGroupMDP& mdp) {
    const Shape& sh = mdp.shape;
    std::vector<TimedPolicy> candidates;
    for (std::size_t a = 0; a < sh.n_actions; ++a) candidates.push_back(TimedPolicy::constant_action(sh, a));
    candidates.push_back(TimedPolicy::uniform(sh));

    SafePolicy best;
    bool have = false;
    for (const auto& c : candidates) {
        TimedPolicySet set(mdp.n_groups(), c);
        const double gap = fairness_gaps(mdp, set).max_gap;
        if (!have || gap < best.certified_gap) {
            best = {std::move(set), gap};
            have = true;
        }
    }
    return best;
}

double EpisodeRecord::max_gap() const {
    return gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
}

double EpisodeRecord::max_gap_for_task(std::size_t m, std::size_t n_pairs) const {
    double best = 0.0;
    for (std::size_t p = 0; p < n_pairs; ++p) best = std::max(best, gaps[m * n_pairs + p]);
    return best;
}

bool EpisodeRecord::operator==(const EpisodeRecord& other) const {
    return episode == other.episode && mode == other.mode && returns.n_tasks() == other.returns.n_tasks() &&
           returns.values() == other.returns.values() && gaps == other.gaps && regret == other.regret;
}

FairLearner::FairLearner(const TaskedGroupMDP& mdp, FairnessConfig cfg, std::uint64_t seed,
                         std::vector<std::size_t> tasks)
    : mdp_(&mdp), cfg_(std::move(cfg)), rng_(seed) {
    require_valid(mdp);
    validate_config(cfg_, mdp);
    for (std::size_t m : tasks)
        if (m >= mdp.n_tasks) throw std::invalid_argument("task index out of range");

    planner_.epsilon = cfg_.epsilon;
    planner_.epsilon0 = cfg_.epsilon0;
    planner_.alpha_rule = cfg_.alpha_rule;
    planner_.tasks = tasks.empty() ? all_tasks(mdp.n_tasks) : std::move(tasks);

    for (const auto& g : mdp.groups) initial_.push_back(g.initial_dist);
    const double c = confidence_constant({cfg_.delta, cfg_.n_episodes}, mdp.shape, mdp.n_groups());
    est_ = EstimatorState(mdp.shape, mdp.n_groups(), mdp.n_tasks, c, cfg_.radius_scale);
    summary_.seed = seed;
    summary_.cumulative_regret.assign(mdp.n_tasks, 0.0);
    summary_.max_gap.assign(mdp.n_tasks, 0.0);
}

EpisodeRecord FairLearner::step(const RegretOracle& oracle, const LpBackend& backend, const LpObserver& observer) {
    const auto start = std::chrono::steady_clock::now();
    const TaskedGroupMDP& mdp = *mdp_;

    EpisodePlan plan = plan_episode(est_, initial_, cfg_.pi0, planner_, backend, observer);

    // Counters change only after every group has acted with this episode's policies.
    std::vector<Trajectory> trajectories;
    for (std::size_t z = 0; z < mdp.n_groups(); ++z) {
        if (cfg_.schedule == SamplingSchedule::round_robin && z != episode_ % mdp.n_groups()) continue;
        trajectories.push_back(sample_trajectory(mdp, z, plan.policies, rng_));
    }
    for (const auto& t : trajectories) est_.update(t);
    ++episode_;

    EpisodeRecord rec;
    rec.episode = episode_;
    rec.mode = plan.mode;
    rec.returns = return_table(mdp, plan.policies);
    const FairnessGapReport gaps = fairness_gaps(rec.returns);
    rec.gaps = gaps.gaps;
    rec.regret.assign(mdp.n_tasks, 0.0);
    for (std::size_t m = 0; m < mdp.n_tasks; ++m)
        for (std::size_t z = 0; z < mdp.n_groups(); ++z)
            rec.regret[m] += oracle.returns.at(m, z) - rec.returns.at(m, z);

    for (std::size_t m = 0; m < mdp.n_tasks; ++m) {
        summary_.cumulative_regret[m] += rec.regret[m];
        summary_.max_gap[m] = std::max(summary_.max_gap[m], gaps.max_gap_for_task(m));
    }
    if (plan.mode == PlanMode::fallback) ++summary_.fallback_episodes;
    if (plan.infeasible_anomaly) ++summary_.lp_anomalies;

    rec.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

namespace {

constexpr int kCheckpointVersion = 1;

}  // namespace

std::string FairLearner::checkpoint() const {
    const Shape& sh = est_.shape();
    json doc;
    doc["format_version"] = kCheckpointVersion;
    doc["episode"] = episode_;
    doc["rng_state"] = rng_.state();
    doc["tasks"] = planner_.tasks;
    doc["estimator"] = {
        {"n_states", sh.n_states},
        {"n_actions", sh.n_actions},
        {"horizon", sh.horizon},
        {"n_groups", est_.n_groups()},
        {"n_tasks", est_.n_tasks()},
        {"confidence_constant", est_.confidence_constant()},
        {"radius_scale", est_.radius_scale()},
        {"counts", est_.counts()},
        {"next_counts", est_.next_counts()},
        {"reward_estimates", est_.reward_estimates()},
        {"reward_observed", est_.observed_flags()},
    };
    doc["summary"] = {
        {"cumulative_regret", summary_.cumulative_regret},
        {"max_gap", summary_.max_gap},
        {"fallback_episodes", summary_.fallback_episodes},
        {"lp_anomalies", summary_.lp_anomalies},
        {"seed", summary_.seed},
    };
    return doc.dump();
}

FairLearner FairLearner::resume(const TaskedGroupMDP& mdp, FairnessConfig cfg, const std::string& checkpoint,
                                std::vector<std::size_t> tasks) {
    json doc;
    try {
        doc = json::parse(checkpoint);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (doc.value("format_version", 0) != kCheckpointVersion)
        throw std::invalid_argument("unsupported checkpoint format_version");

    try {
        const json& s = doc.at("summary");
        FairLearner learner(mdp, std::move(cfg), s.at("seed").get<std::uint64_t>(), std::move(tasks));
        if (doc.at("tasks").get<std::vector<std::size_t>>() != learner.planner_.tasks)
            throw std::invalid_argument("checkpoint was written for a different task selection");

        const json& e = doc.at("estimator");
        const Shape shape{e.at("n_states").get<std::size_t>(), e.at("n_actions").get<std::size_t>(),
                          e.at("horizon").get<std::size_t>()};
        if (shape != mdp.shape || e.at("n_groups").get<std::size_t>() != mdp.n_groups() ||
            e.at("n_tasks").get<std::size_t>() != mdp.n_tasks)
            throw std::invalid_argument("checkpoint dimensions do not match the environment");
        learner.est_ = EstimatorState::from_raw(
            shape, mdp.n_groups(), mdp.n_tasks, e.at("confidence_constant").get<double>(),
            e.at("radius_scale").get<double>(), e.at("counts").get<std::vector<std::uint64_t>>(),
            e.at("next_counts").get<std::vector<std::uint64_t>>(), e.at("reward_estimates").get<std::vector<double>>(),
            e.at("reward_observed").get<std::vector<std::uint8_t>>());

        learner.episode_ = doc.at("episode").get<std::size_t>();
        learner.rng_.restore(doc.at("rng_state").get<std::string>());
        learner.summary_.cumulative_regret = s.at("cumulative_regret").get<std::vector<double>>();
        learner.summary_.max_gap = s.at("max_gap").get<std::vector<double>>();
        learner.summary_.fallback_episodes = s.at("fallback_episodes").get<std::size_t>();
        learner.summary_.lp_anomalies = s.at("lp_anomalies").get<std::size_t>();
        return learner;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
    }
}

namespace {

RunResult run_loop(const TaskedGroupMDP& mdp, const FairnessConfig& cfg, std::uint64_t seed,
                   std::vector<std::size_t> tasks, const std::optional<RegretOracle>& oracle) {
    const DenseSimplex backend;
    FairLearner learner(mdp, cfg, seed, std::move(tasks));
    const RegretOracle reference = oracle ? *oracle : compute_fair_optimum(mdp, cfg.epsilon, backend);
    RunResult result;
    result.records.reserve(cfg.n_episodes);
    for (std::size_t k = 0; k < cfg.n_episodes; ++k) result.records.push_back(learner.step(reference, backend));
    result.summary = learner.summary();
    return result;
}

}  // namespace

RunResult run_learner(const TaskedGroupMDP& mdp, const FairnessConfig& cfg, std::uint64_t seed,
                      const std::optional<RegretOracle>& oracle) {
    return run_loop(mdp, cfg, seed, {}, oracle);
}

RunResult run_baseline(const TaskedGroupMDP& mdp, const FairnessConfig& cfg, std::size_t constrained_task,
                       std::uint64_t seed, const std::optional<RegretOracle>& oracle) {
    if (constrained_task >= mdp.n_tasks) throw std::invalid_argument("constrained task out of range");
    return run_loop(mdp, cfg, seed, {constrained_task}, oracle);
}

}  // namespace fairmt
