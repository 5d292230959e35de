#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fairmt/mdp.hpp"

namespace fairmt {

struct ConfidenceConfig {
    double delta = 0.1;          // confidence parameter, in (0, 1)
    std::size_t n_episodes = 1;  // planned number of episodes K
};

/// C = ln(2 |Z| |S|^2 |A| H K / delta).
double confidence_constant(const ConfidenceConfig& cfg, Shape shape, std::size_t n_groups);

/// The learner's picture of the unknown MDP: visit counts, next-state counts,
/// observed (deterministic) rewards and the confidence constant.
///
/// Radii are beta = scale * sqrt(C / max(N, 1)); the scale is 1 for the
/// textbook radius and only differs when a run asks for tighter radii.
class EstimatorState {
public:
    EstimatorState() = default;
    EstimatorState(Shape shape, std::size_t n_groups, std::size_t n_tasks, double confidence_constant,
                   double radius_scale = 1.0);

    const Shape& shape() const { return shape_; }
    std::size_t n_groups() const { return n_groups_; }
    std::size_t n_tasks() const { return n_tasks_; }
    double confidence_constant() const { return confidence_constant_; }
    double radius_scale() const { return radius_scale_; }

    void update(const Trajectory& traj);

    std::uint64_t count(std::size_t z, std::size_t h, std::size_t s, std::size_t a) const {
        return counts_[z * shape_.cells() + shape_.cell(h, s, a)];
    }
    std::uint64_t next_count(std::size_t z, std::size_t h, std::size_t s, std::size_t a, std::size_t next) const {
        return next_counts_[z * shape_.cells() * shape_.n_states + shape_.row(h, s, a) + next];
    }
    bool reward_observed(std::size_t h, std::size_t s, std::size_t a) const {
        return reward_observed_[shape_.cell(h, s, a)] != 0;
    }
    /// Observed reward; 0 for cells never visited.
    double reward_estimate(std::size_t m, std::size_t h, std::size_t s, std::size_t a) const {
        return reward_estimate_[m * shape_.cells() + shape_.cell(h, s, a)];
    }
    std::span<const double> reward_table(std::size_t m) const {
        return {reward_estimate_.data() + m * shape_.cells(), shape_.cells()};
    }

    /// next_counts / max(N, 1); the zero vector for unvisited cells.
    std::vector<double> empirical_transition(std::size_t z, std::size_t h, std::size_t s, std::size_t a) const;
    /// Full [h][s][a][s'] table of empirical rows for one group.
    std::vector<double> empirical_transition_table(std::size_t z) const;

    double confidence_radius(std::size_t z, std::size_t h, std::size_t s, std::size_t a) const;
    /// [h][s][a] table of radii for one group.
    std::vector<double> radius_table(std::size_t z) const;

    /// Raw storage, exposed for checkpointing.
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    const std::vector<std::uint64_t>& next_counts() const { return next_counts_; }
    const std::vector<double>& reward_estimates() const { return reward_estimate_; }
    const std::vector<std::uint8_t>& observed_flags() const { return reward_observed_; }
    static EstimatorState from_raw(Shape shape, std::size_t n_groups, std::size_t n_tasks, double c,
                                   double radius_scale, std::vector<std::uint64_t> counts,
                                   std::vector<std::uint64_t> next_counts, std::vector<double> rewards,
                                   std::vector<std::uint8_t> observed);

    bool operator==(const EstimatorState&) const = default;

private:
    Shape shape_;
    std::size_t n_groups_ = 0;
    std::size_t n_tasks_ = 0;
    double confidence_constant_ = 0.0;
    double radius_scale_ = 1.0;
    std::vector<std::uint64_t> counts_;       // [z][h][s][a]
    std::vector<std::uint64_t> next_counts_;  // [z][h][s][a][s']
    std::vector<double> reward_estimate_;     // [m][h][s][a]
    std::vector<std::uint8_t> reward_observed_;  // [h][s][a]
};

}  // namespace fairmt
