#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairmt/estimation.hpp"

namespace fairmt {

enum class RewardKind { optimistic, pessimistic, exploration };

/// Which exploration coefficient to use. `base` is |S|H + 8|S|H^2/(eps-eps0);
/// `task_squared` multiplies the second term by M^2.
enum class AlphaRule { base, task_squared };

/// Synthetic reward table indexed [task][group][h][s][a]. Values are not
/// clipped: pessimistic entries may be negative and optimistic ones exceed 1.
class RewardVariant {
public:
    RewardVariant() = default;
    RewardVariant(RewardKind kind, Shape shape, std::size_t n_tasks, std::size_t n_groups);

    RewardKind kind() const { return kind_; }
    const Shape& shape() const { return shape_; }
    std::size_t n_tasks() const { return n_tasks_; }
    std::size_t n_groups() const { return n_groups_; }

    std::span<const double> table(std::size_t m, std::size_t z) const {
        return {values_.data() + (m * n_groups_ + z) * shape_.cells(), shape_.cells()};
    }
    std::span<double> table(std::size_t m, std::size_t z) {
        return {values_.data() + (m * n_groups_ + z) * shape_.cells(), shape_.cells()};
    }

private:
    RewardKind kind_ = RewardKind::optimistic;
    Shape shape_;
    std::size_t n_tasks_ = 0;
    std::size_t n_groups_ = 0;
    std::vector<double> values_;
};

/// r + coefficient * beta for every task and group.
/// `rewards[m]` is an [h][s][a] table, `radii[z]` likewise.
RewardVariant shifted_reward(RewardKind kind, Shape shape, std::span<const std::vector<double>> rewards,
                             std::span<const std::vector<double>> radii, double coefficient);

double exploration_coefficient(Shape shape, std::size_t n_tasks, double epsilon, double epsilon0,
                               AlphaRule rule = AlphaRule::base);

/// r_hat + |S| H beta.
RewardVariant optimistic_reward(const EstimatorState& est);
/// r_hat - |S| H beta.
RewardVariant pessimistic_reward(const EstimatorState& est);
/// r_hat + alpha beta; throws std::invalid_argument unless epsilon > epsilon0.
RewardVariant exploration_reward(const EstimatorState& est, double epsilon, double epsilon0,
                                 AlphaRule rule = AlphaRule::base);

struct RewardVariants {
    RewardVariant optimistic;
    RewardVariant pessimistic;
    RewardVariant exploration;
};

RewardVariants reward_variants(const EstimatorState& est, double epsilon, double epsilon0,
                               AlphaRule rule = AlphaRule::base);

}  // namespace fairmt
