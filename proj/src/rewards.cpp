#include "fairmt/rewards.hpp"

#include <stdexcept>

namespace fairmt {

RewardVariant::RewardVariant(RewardKind kind, Shape shape, std::size_t n_tasks, std::size_t n_groups)
    : kind_(kind), shape_(shape), n_tasks_(n_tasks), n_groups_(n_groups),
      values_(n_tasks * n_groups * shape.cells(), 0.0) {}

RewardVariant shifted_reward(RewardKind kind, Shape shape, std::span<const std::vector<double>> rewards,
                             std::span<const std::vector<double>> radii, double coefficient) {
    RewardVariant out(kind, shape, rewards.size(), radii.size());
    for (std::size_t m = 0; m < rewards.size(); ++m) {
        if (rewards[m].size() != shape.cells()) throw DimensionError("reward table has wrong size");
        for (std::size_t z = 0; z < radii.size(); ++z) {
            if (radii[z].size() != shape.cells()) throw DimensionError("radius table has wrong size");
            auto dst = out.table(m, z);
            for (std::size_t c = 0; c < shape.cells(); ++c) dst[c] = rewards[m][c] + coefficient * radii[z][c];
        }
    }
    return out;
}

double exploration_coefficient(Shape shape, std::size_t n_tasks, double epsilon, double epsilon0, AlphaRule rule) {
    if (!(epsilon > epsilon0)) throw std::invalid_argument("exploration bonus requires epsilon > epsilon0");
    const double sh = static_cast<double>(shape.n_states) * static_cast<double>(shape.horizon);
    const double h = static_cast<double>(shape.horizon);
    double second = 8.0 * sh * h / (epsilon - epsilon0);
    if (rule == AlphaRule::task_squared) second *= static_cast<double>(n_tasks) * static_cast<double>(n_tasks);
    return sh + second;
}

namespace {

struct EstimateTables {
    std::vector<std::vector<double>> rewards;
    std::vector<std::vector<double>> radii;
};

EstimateTables tables_of(const EstimatorState& est) {
    EstimateTables t;
    for (std::size_t m = 0; m < est.n_tasks(); ++m) {
        auto r = est.reward_table(m);
        t.rewards.emplace_back(r.begin(), r.end());
    }
    for (std::size_t z = 0; z < est.n_groups(); ++z) t.radii.push_back(est.radius_table(z));
    return t;
}

double sandwich_coefficient(const Shape& shape) {
    return static_cast<double>(shape.n_states) * static_cast<double>(shape.horizon);
}

}  // namespace

RewardVariant optimistic_reward(const EstimatorState& est) {
    auto t = tables_of(est);
    return shifted_reward(RewardKind::optimistic, est.shape(), t.rewards, t.radii, sandwich_coefficient(est.shape()));
}

RewardVariant pessimistic_reward(const EstimatorState& est) {
    auto t = tables_of(est);
    return shifted_reward(RewardKind::pessimistic, est.shape(), t.rewards, t.radii,
                          -sandwich_coefficient(est.shape()));
}

RewardVariant exploration_reward(const EstimatorState& est, double epsilon, double epsilon0, AlphaRule rule) {
    const double alpha = exploration_coefficient(est.shape(), est.n_tasks(), epsilon, epsilon0, rule);
    auto t = tables_of(est);
    return shifted_reward(RewardKind::exploration, est.shape(), t.rewards, t.radii, alpha);
}

RewardVariants reward_variants(const EstimatorState& est, double epsilon, double epsilon0, AlphaRule rule) {
    const double alpha = exploration_coefficient(est.shape(), est.n_tasks(), epsilon, epsilon0, rule);
    const double width = sandwich_coefficient(est.shape());
    auto t = tables_of(est);
    return {shifted_reward(RewardKind::optimistic, est.shape(), t.rewards, t.radii, width),
            shifted_reward(RewardKind::pessimistic, est.shape(), t.rewards, t.radii, -width),
            shifted_reward(RewardKind::exploration, est.shape(), t.rewards, t.radii, alpha)};
}

}  // namespace fairmt
