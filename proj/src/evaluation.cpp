#include "fairmt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairmt {

namespace {

void check_sizes(const Shape& sh, std::span<const double> initial, std::span<const double> transition) {
    if (initial.size() != sh.n_states) throw DimensionError("initial distribution size does not match |S|");
    if (transition.size() != sh.cells() * sh.n_states) throw DimensionError("transition table size mismatch");
}

}  // namespace

double evaluate_return(const TimedPolicy& policy, std::span<const double> initial,
                       std::span<const double> transition, std::span<const double> reward) {
    const Shape& sh = policy.shape();
    check_sizes(sh, initial, transition);
    if (reward.size() != sh.cells()) throw DimensionError("reward table size does not match shape");

    const std::size_t n = sh.n_states;
    std::vector<double> next(n, 0.0), cur(n, 0.0);
    for (std::size_t h = sh.horizon; h-- > 0;) {
        for (std::size_t s = 0; s < n; ++s) {
            double v = 0.0;
            for (std::size_t a = 0; a < sh.n_actions; ++a) {
                const double p = policy.prob(h, s, a);
                if (p == 0.0) continue;
                const double* row = transition.data() + sh.row(h, s, a);
                double q = reward[sh.cell(h, s, a)];
                for (std::size_t k = 0; k < n; ++k) q += row[k] * next[k];
                v += p * q;
            }
            cur[s] = v;
        }
        std::swap(cur, next);
    }
    double j = 0.0;
    for (std::size_t s = 0; s < n; ++s) j += initial[s] * next[s];
    return j;
}

std::vector<double> occupancy_measure(const TimedPolicy& policy, std::span<const double> initial,
                                      std::span<const double> transition) {
    const Shape& sh = policy.shape();
    check_sizes(sh, initial, transition);
    const std::size_t n = sh.n_states;
    std::vector<double> d(sh.cells(), 0.0);
    std::vector<double> state_mass(initial.begin(), initial.end());
    std::vector<double> next_mass(n);
    for (std::size_t h = 0; h < sh.horizon; ++h) {
        std::fill(next_mass.begin(), next_mass.end(), 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t a = 0; a < sh.n_actions; ++a) {
                const double x = state_mass[s] * policy.prob(h, s, a);
                d[sh.cell(h, s, a)] = x;
                if (x == 0.0) continue;
                const double* row = transition.data() + sh.row(h, s, a);
                for (std::size_t k = 0; k < n; ++k) next_mass[k] += x * row[k];
            }
        }
        std::swap(state_mass, next_mass);
    }
    return d;
}

double evaluate_under_estimate(const TimedPolicy& policy, std::span<const double> initial,
                               const EstimatorState& est, std::size_t group, const RewardVariant& variant,
                               std::size_t task) {
    return evaluate_return(policy, initial, est.empirical_transition_table(group), variant.table(task, group));
}

double ReturnTable::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

ReturnTable return_table(const TaskedGroupMDP& mdp, const TimedPolicySet& policies) {
    check_policy_shape(mdp, policies);
    ReturnTable table(mdp.n_tasks, mdp.n_groups());
    for (std::size_t m = 0; m < mdp.n_tasks; ++m)
        for (std::size_t z = 0; z < mdp.n_groups(); ++z)
            table.at(m, z) = evaluate_return(policies[z], mdp.groups[z].initial_dist, mdp.groups[z].transition,
                                             mdp.rewards[m]);
    return table;
}

std::vector<std::pair<std::size_t, std::size_t>> group_pairs(std::size_t n_groups) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n_groups; ++i)
        for (std::size_t j = i + 1; j < n_groups; ++j) pairs.emplace_back(i, j);
    return pairs;
}

double FairnessGapReport::gap(std::size_t m, std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    for (std::size_t p = 0; p < pairs.size(); ++p)
        if (pairs[p] == std::make_pair(i, j)) return gap(m, p);
    throw std::out_of_range("no such group pair");
}

double FairnessGapReport::max_gap_for_task(std::size_t m) const {
    double best = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) best = std::max(best, gap(m, p));
    return best;
}

FairnessGapReport fairness_gaps(const ReturnTable& returns) {
    FairnessGapReport report;
    report.pairs = group_pairs(returns.n_groups());
    report.n_tasks = returns.n_tasks();
    report.gaps.reserve(report.n_tasks * report.pairs.size());
    for (std::size_t m = 0; m < returns.n_tasks(); ++m) {
        for (const auto& [i, j] : report.pairs) {
            const double g = std::abs(returns.at(m, i) - returns.at(m, j));
            report.gaps.push_back(g);
            report.max_gap = std::max(report.max_gap, g);
        }
    }
    return report;
}

FairnessGapReport fairness_gaps(const TaskedGroupMDP& mdp, const TimedPolicySet& policies) {
    return fairness_gaps(return_table(mdp, policies));
}

}  // namespace fairmt
