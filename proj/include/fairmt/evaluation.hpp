#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fairmt/estimation.hpp"
#include "fairmt/mdp.hpp"
#include "fairmt/rewards.hpp"

namespace fairmt {

/// Undiscounted finite-horizon return by backward induction:
///   V_H = 0,  V_h(s) = sum_a pi_h(a|s) [ r_h(s,a) + sum_s' P_h(s'|s,a) V_{h+1}(s') ],
///   J = sum_s mu(s) V_0(s).
/// Transition rows may be sub-stochastic (all-zero rows of unvisited cells
/// simply contribute no continuation value).
double evaluate_return(const TimedPolicy& policy, std::span<const double> initial,
                       std::span<const double> transition, std::span<const double> reward);

/// State-action occupancy d_h(s,a) of a policy, laid out as [h][s][a].
std::vector<double> occupancy_measure(const TimedPolicy& policy, std::span<const double> initial,
                                      std::span<const double> transition);

/// J(pi_z; mu_z, P_hat_z, variant_{m,z}) with the estimator's empirical transitions.
double evaluate_under_estimate(const TimedPolicy& policy, std::span<const double> initial,
                               const EstimatorState& est, std::size_t group, const RewardVariant& variant,
                               std::size_t task);

/// True returns indexed [task][group].
class ReturnTable {
public:
    ReturnTable() = default;
    ReturnTable(std::size_t n_tasks, std::size_t n_groups)
        : n_tasks_(n_tasks), n_groups_(n_groups), values_(n_tasks * n_groups, 0.0) {}

    std::size_t n_tasks() const { return n_tasks_; }
    std::size_t n_groups() const { return n_groups_; }
    double& at(std::size_t m, std::size_t z) { return values_[m * n_groups_ + z]; }
    double at(std::size_t m, std::size_t z) const { return values_[m * n_groups_ + z]; }
    const std::vector<double>& values() const { return values_; }
    double total() const;

private:
    std::size_t n_tasks_ = 0;
    std::size_t n_groups_ = 0;
    std::vector<double> values_;
};

ReturnTable return_table(const TaskedGroupMDP& mdp, const TimedPolicySet& policies);

/// Unordered group pairs {i, j} with i < j, in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> group_pairs(std::size_t n_groups);

struct FairnessGapReport {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t n_tasks = 0;
    std::vector<double> gaps;  // [task][pair], |J_i - J_j|
    double max_gap = 0.0;

    double gap(std::size_t m, std::size_t pair) const { return gaps[m * pairs.size() + pair]; }
    /// Gap of groups (i, j) in either order.
    double gap(std::size_t m, std::size_t i, std::size_t j) const;
    double max_gap_for_task(std::size_t m) const;
};

FairnessGapReport fairness_gaps(const ReturnTable& returns);
FairnessGapReport fairness_gaps(const TaskedGroupMDP& mdp, const TimedPolicySet& policies);

}  // namespace fairmt
