#include "fairmt/estimation.hpp"

#include <algorithm>
#include <cmath>

namespace fairmt {

double confidence_constant(const ConfidenceConfig& cfg, Shape shape, std::size_t n_groups) {
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (n_groups == 0 || shape.n_states == 0 || shape.n_actions == 0 || shape.horizon == 0 || cfg.n_episodes == 0)
        throw std::invalid_argument("confidence constant needs positive dimensions");
    const double s = static_cast<double>(shape.n_states);
    // log of a product as a sum of logs so large K cannot overflow
    return std::log(2.0) + std::log(static_cast<double>(n_groups)) + 2.0 * std::log(s) +
           std::log(static_cast<double>(shape.n_actions)) + std::log(static_cast<double>(shape.horizon)) +
           std::log(static_cast<double>(cfg.n_episodes)) - std::log(cfg.delta);
}

EstimatorState::EstimatorState(Shape shape, std::size_t n_groups, std::size_t n_tasks, double c,
                               double radius_scale)
    : shape_(shape),
      n_groups_(n_groups),
      n_tasks_(n_tasks),
      confidence_constant_(c),
      radius_scale_(radius_scale),
      counts_(n_groups * shape.cells(), 0),
      next_counts_(n_groups * shape.cells() * shape.n_states, 0),
      reward_estimate_(n_tasks * shape.cells(), 0.0),
      reward_observed_(shape.cells(), 0) {
    if (!(c >= 0.0)) throw std::invalid_argument("confidence constant must be nonnegative");
    if (!(radius_scale >= 0.0)) throw std::invalid_argument("radius scale must be nonnegative");
}

EstimatorState EstimatorState::from_raw(Shape shape, std::size_t n_groups, std::size_t n_tasks, double c,
                                        double radius_scale, std::vector<std::uint64_t> counts,
                                        std::vector<std::uint64_t> next_counts, std::vector<double> rewards,
                                        std::vector<std::uint8_t> observed) {
    EstimatorState est(shape, n_groups, n_tasks, c, radius_scale);
    if (counts.size() != est.counts_.size() || next_counts.size() != est.next_counts_.size() ||
        rewards.size() != est.reward_estimate_.size() || observed.size() != est.reward_observed_.size())
        throw DimensionError("estimator tables do not match the declared dimensions");
    est.counts_ = std::move(counts);
    est.next_counts_ = std::move(next_counts);
    est.reward_estimate_ = std::move(rewards);
    est.reward_observed_ = std::move(observed);
    for (std::size_t i = 0; i < est.counts_.size(); ++i) {
        std::uint64_t total = 0;
        for (std::size_t n = 0; n < shape.n_states; ++n) total += est.next_counts_[i * shape.n_states + n];
        if (total != est.counts_[i]) throw std::invalid_argument("next-state counts do not add up to visit counts");
    }
    return est;
}

void EstimatorState::update(const Trajectory& traj) {
    if (traj.group_id >= n_groups_) throw DimensionError("trajectory group out of range");
    if (traj.steps.size() != shape_.horizon) throw DimensionError("trajectory length differs from horizon");
    const std::size_t z = traj.group_id;
    for (const auto& t : traj.steps) {
        if (t.state >= shape_.n_states || t.next_state >= shape_.n_states || t.action >= shape_.n_actions ||
            t.rewards.size() != n_tasks_)
            throw DimensionError("trajectory entry out of range");
        const std::size_t cell = shape_.cell(t.step, t.state, t.action);
        ++counts_[z * shape_.cells() + cell];
        ++next_counts_[(z * shape_.cells() + cell) * shape_.n_states + t.next_state];
        if (!reward_observed_[cell]) {
            for (std::size_t m = 0; m < n_tasks_; ++m) reward_estimate_[m * shape_.cells() + cell] = t.rewards[m];
            reward_observed_[cell] = 1;
        }
    }
}

std::vector<double> EstimatorState::empirical_transition(std::size_t z, std::size_t h, std::size_t s,
                                                         std::size_t a) const {
    std::vector<double> row(shape_.n_states, 0.0);
    const double denom = static_cast<double>(std::max<std::uint64_t>(count(z, h, s, a), 1));
    for (std::size_t n = 0; n < shape_.n_states; ++n)
        row[n] = static_cast<double>(next_count(z, h, s, a, n)) / denom;
    return row;
}

std::vector<double> EstimatorState::empirical_transition_table(std::size_t z) const {
    const std::size_t n = shape_.n_states;
    std::vector<double> table(shape_.cells() * n, 0.0);
    const std::uint64_t* cnt = counts_.data() + z * shape_.cells();
    const std::uint64_t* next = next_counts_.data() + z * shape_.cells() * n;
    for (std::size_t cell = 0; cell < shape_.cells(); ++cell) {
        const double denom = static_cast<double>(std::max<std::uint64_t>(cnt[cell], 1));
        for (std::size_t k = 0; k < n; ++k) table[cell * n + k] = static_cast<double>(next[cell * n + k]) / denom;
    }
    return table;
}

double EstimatorState::confidence_radius(std::size_t z, std::size_t h, std::size_t s, std::size_t a) const {
    const double n = static_cast<double>(std::max<std::uint64_t>(count(z, h, s, a), 1));
    return radius_scale_ * std::sqrt(confidence_constant_ / n);
}

std::vector<double> EstimatorState::radius_table(std::size_t z) const {
    std::vector<double> table(shape_.cells());
    const std::uint64_t* cnt = counts_.data() + z * shape_.cells();
    for (std::size_t cell = 0; cell < shape_.cells(); ++cell)
        table[cell] = radius_scale_ *
                      std::sqrt(confidence_constant_ / static_cast<double>(std::max<std::uint64_t>(cnt[cell], 1)));
    return table;
}

}  // namespace fairmt
