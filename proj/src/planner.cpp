#include "fairmt/planner.hpp"

#include <iostream>
#include <numeric>

#include "fairmt/evaluation.hpp"

namespace fairmt {

std::vector<std::size_t> all_tasks(std::size_t n_tasks) {
    std::vector<std::size_t> tasks(n_tasks);
    std::iota(tasks.begin(), tasks.end(), std::size_t{0});
    return tasks;
}

OccupancyLp OccupancyLp::build(Shape shape, std::span<const std::vector<double>> initial,
                               std::span<const std::vector<double>> transitions, const RewardVariant& upper,
                               const RewardVariant& lower, const RewardVariant& objective, double epsilon,
                               std::span<const std::size_t> tasks) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const std::size_t n_groups = initial.size();
    if (transitions.size() != n_groups) throw DimensionError("one transition table per group is required");
    for (std::size_t z = 0; z < n_groups; ++z) {
        if (initial[z].size() != shape.n_states) throw DimensionError("initial distribution has wrong size");
        if (transitions[z].size() != shape.cells() * shape.n_states)
            throw DimensionError("transition table has wrong size");
    }
    for (std::size_t m : tasks)
        if (m >= upper.n_tasks() || m >= lower.n_tasks() || m >= objective.n_tasks())
            throw DimensionError("task index out of range");

    OccupancyLp lp;
    lp.shape_ = shape;
    lp.n_groups_ = n_groups;
    lp.epsilon_ = epsilon;
    lp.program_ = LinearProgram(n_groups * shape.cells());
    auto& prog = lp.program_;

    for (std::size_t z = 0; z < n_groups; ++z) {
        const auto& P = transitions[z];
        for (std::size_t h = 0; h < shape.horizon; ++h) {
            for (std::size_t s = 0; s < shape.n_states; ++s) {
                std::vector<std::pair<std::size_t, double>> terms;
                for (std::size_t a = 0; a < shape.n_actions; ++a) terms.emplace_back(lp.variable(z, h, s, a), 1.0);
                if (h > 0) {
                    for (std::size_t sp = 0; sp < shape.n_states; ++sp)
                        for (std::size_t ap = 0; ap < shape.n_actions; ++ap) {
                            const double p = P[shape.row(h - 1, sp, ap) + s];
                            if (p != 0.0) terms.emplace_back(lp.variable(z, h - 1, sp, ap), -p);
                        }
                }
                prog.add_row(std::move(terms), RowSense::equal, h == 0 ? initial[z][s] : 0.0);
            }
        }
    }

    for (std::size_t m : tasks) {
        for (std::size_t i = 0; i < n_groups; ++i) {
            for (std::size_t j = 0; j < n_groups; ++j) {
                if (i == j) continue;
                std::vector<std::pair<std::size_t, double>> terms;
                auto up = upper.table(m, i);
                auto lo = lower.table(m, j);
                for (std::size_t c = 0; c < shape.cells(); ++c)
                    if (up[c] != 0.0) terms.emplace_back(i * shape.cells() + c, up[c]);
                for (std::size_t c = 0; c < shape.cells(); ++c)
                    if (lo[c] != 0.0) terms.emplace_back(j * shape.cells() + c, -lo[c]);
                const std::size_t row = prog.add_row(std::move(terms), RowSense::less_equal, epsilon);
                lp.fairness_.push_back({m, i, j, row});
            }
        }
    }

    for (std::size_t m : tasks)
        for (std::size_t z = 0; z < n_groups; ++z) {
            auto r = objective.table(m, z);
            for (std::size_t c = 0; c < shape.cells(); ++c) prog.objective[z * shape.cells() + c] += r[c];
        }
    return lp;
}

std::vector<double> OccupancyLp::occupancy(const std::vector<double>& x, std::size_t z) const {
    auto first = x.begin() + static_cast<std::ptrdiff_t>(z * shape_.cells());
    return {first, first + static_cast<std::ptrdiff_t>(shape_.cells())};
}

TimedPolicySet OccupancyLp::policies(const std::vector<double>& x) const {
    TimedPolicySet out;
    for (std::size_t z = 0; z < n_groups_; ++z) out.push_back(policy_from_occupancy(shape_, occupancy(x, z)));
    return out;
}

OccupancyLp build_lp(const EstimatorState& est, std::span<const std::vector<double>> initial,
                     const RewardVariants& variants, double epsilon, std::span<const std::size_t> tasks) {
    std::vector<std::vector<double>> transitions;
    for (std::size_t z = 0; z < est.n_groups(); ++z) transitions.push_back(est.empirical_transition_table(z));
    return OccupancyLp::build(est.shape(), initial, transitions, variants.optimistic, variants.pessimistic,
                              variants.exploration, epsilon, tasks);
}

LpSolution solve_lp(const OccupancyLp& lp, const LpBackend& backend) {
    LpResult res = backend.solve(lp.program());
    LpSolution sol;
    sol.status = res.status;
    if (res.status != LpStatus::optimal) return sol;
    sol.objective_value = res.objective;
    for (std::size_t z = 0; z < lp.n_groups(); ++z) sol.occupancies.push_back(lp.occupancy(res.x, z));
    sol.x = std::move(res.x);
    return sol;
}

bool fallback_check(const EstimatorState& est, std::span<const std::vector<double>> initial,
                    const TimedPolicySet& pi0, const RewardVariants& variants, double epsilon, double epsilon0,
                    std::span<const std::size_t> tasks) {
    if (!(epsilon > epsilon0 && epsilon0 >= 0.0)) throw std::invalid_argument("need epsilon > epsilon0 >= 0");
    const std::size_t n_groups = est.n_groups();
    if (pi0.size() != n_groups || initial.size() != n_groups) throw DimensionError("one pi0 and mu per group");
    if (n_groups < 2) return false;

    std::vector<std::vector<double>> transitions;
    for (std::size_t z = 0; z < n_groups; ++z) transitions.push_back(est.empirical_transition_table(z));
    const double threshold = 0.5 * (epsilon + epsilon0);
    for (std::size_t m : tasks) {
        std::vector<double> upper(n_groups), lower(n_groups);
        for (std::size_t z = 0; z < n_groups; ++z) {
            upper[z] = evaluate_return(pi0[z], initial[z], transitions[z], variants.optimistic.table(m, z));
            lower[z] = evaluate_return(pi0[z], initial[z], transitions[z], variants.pessimistic.table(m, z));
        }
        for (std::size_t i = 0; i < n_groups; ++i)
            for (std::size_t j = 0; j < n_groups; ++j)
                if (i != j && upper[i] - lower[j] > threshold) return true;
    }
    return false;
}

const char* to_string(PlanMode mode) { return mode == PlanMode::fallback ? "fallback" : "lp"; }

EpisodePlan plan_episode(const EstimatorState& est, std::span<const std::vector<double>> initial,
                         const TimedPolicySet& pi0, const PlannerConfig& cfg, const LpBackend& backend,
                         const LpObserver& observer) {
    const std::vector<std::size_t> tasks = cfg.tasks.empty() ? all_tasks(est.n_tasks()) : cfg.tasks;
    const RewardVariants variants = reward_variants(est, cfg.epsilon, cfg.epsilon0, cfg.alpha_rule);

    EpisodePlan plan;
    if (fallback_check(est, initial, pi0, variants, cfg.epsilon, cfg.epsilon0, tasks)) {
        plan.policies = pi0;
        plan.mode = PlanMode::fallback;
        return plan;
    }

    const OccupancyLp lp = build_lp(est, initial, variants, cfg.epsilon, tasks);
    if (observer) observer(lp);
    const LpSolution sol = solve_lp(lp, backend);
    switch (sol.status) {
        case LpStatus::optimal:
            plan.policies = lp.policies(sol.x);
            plan.mode = PlanMode::lp;
            plan.lp_objective = sol.objective_value;
            return plan;
        case LpStatus::infeasible:
            std::clog << "fairmt: fair-policy LP infeasible although the fallback test passed; playing pi0\n";
            plan.policies = pi0;
            plan.mode = PlanMode::fallback;
            plan.infeasible_anomaly = true;
            return plan;
        default:
            throw SolverError(std::string("LP solver failed: ") + to_string(sol.status));
    }
}

}  // namespace fairmt
