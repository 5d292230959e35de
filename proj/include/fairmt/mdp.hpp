#pragma once

// Core tabular model shared by every other module.
//
// Step indices are 0-based throughout the library: step h in [0, H) stands for
// step h+1 of the usual 1..H episode notation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairmt/random.hpp"

namespace fairmt {

/// Shape of a finite-horizon tabular problem (state/action/step counts).
struct Shape {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::size_t horizon = 0;

    std::size_t cells() const { return horizon * n_states * n_actions; }
    std::size_t cell(std::size_t h, std::size_t s, std::size_t a) const {
        return (h * n_states + s) * n_actions + a;
    }
    /// Offset of the next-state row P_h(.|s,a) in a transition table.
    std::size_t row(std::size_t h, std::size_t s, std::size_t a) const {
        return cell(h, s, a) * n_states;
    }
    bool operator==(const Shape&) const = default;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Per-group dynamics: initial distribution and step-indexed transitions.
/// `transition` is laid out as [h][s][a][s'] (see Shape::row).
struct GroupDynamics {
    std::size_t group_id = 0;
    std::vector<double> initial_dist;
    std::vector<double> transition;

    bool operator==(const GroupDynamics&) const = default;
};

/// Multi-task MDP with one set of dynamics per social group. All groups share
/// the state/action spaces, the horizon and the (deterministic) task rewards.
struct TaskedGroupMDP {
    Shape shape;
    std::size_t n_tasks = 0;
    std::vector<GroupDynamics> groups;
    /// rewards[m] is laid out as [h][s][a].
    std::vector<std::vector<double>> rewards;

    std::size_t n_groups() const { return groups.size(); }
    std::span<const double> reward(std::size_t task) const { return rewards.at(task); }

    bool operator==(const TaskedGroupMDP&) const = default;
};

/// Stochastic time-indexed policy for a single group, laid out as [h][s][a].
class TimedPolicy {
public:
    TimedPolicy() = default;
    explicit TimedPolicy(Shape shape);
    TimedPolicy(Shape shape, std::vector<double> probs);

    static TimedPolicy uniform(Shape shape);
    static TimedPolicy constant_action(Shape shape, std::size_t action);

    const Shape& shape() const { return shape_; }
    double prob(std::size_t h, std::size_t s, std::size_t a) const { return probs_[shape_.cell(h, s, a)]; }
    std::span<const double> row(std::size_t h, std::size_t s) const {
        return {probs_.data() + shape_.cell(h, s, 0), shape_.n_actions};
    }
    std::span<double> row(std::size_t h, std::size_t s) {
        return {probs_.data() + shape_.cell(h, s, 0), shape_.n_actions};
    }
    const std::vector<double>& probs() const { return probs_; }

    /// True when every row is a distribution within `tol`.
    bool is_valid(double tol = 1e-9) const;

    bool operator==(const TimedPolicy&) const = default;

private:
    Shape shape_;
    std::vector<double> probs_;
};

/// One policy per group (the policy list played in an episode).
using TimedPolicySet = std::vector<TimedPolicy>;

struct Transition {
    std::size_t step = 0;
    std::size_t state = 0;
    std::size_t action = 0;
    std::size_t next_state = 0;
    std::vector<double> rewards;  // one entry per task

    bool operator==(const Transition&) const = default;
};

/// A length-H episode of one group. `next_state` of the last step is the
/// terminal state reached after acting at step H-1.
struct Trajectory {
    std::size_t group_id = 0;
    std::vector<Transition> steps;

    bool operator==(const Trajectory&) const = default;
};

struct Violation {
    std::string location;
    std::string message;
};

/// Lists every simplex, range and dimension violation; empty when the model is valid.
std::vector<Violation> validate_mdp(const TaskedGroupMDP& mdp, double tol = 1e-12);

/// Throws std::invalid_argument listing the violations, if any.
void require_valid(const TaskedGroupMDP& mdp);

std::string format_violations(const std::vector<Violation>& violations);

void check_policy_shape(const TaskedGroupMDP& mdp, const TimedPolicySet& policies);

/// Draws index i with probability weights[i] (weights need not be normalised
/// but must have positive total mass).
std::size_t sample_index(std::span<const double> weights, Rng& rng);

Trajectory sample_trajectory(const TaskedGroupMDP& mdp, std::size_t group,
                             const TimedPolicySet& policies, Rng& rng);

/// Occupancy [h][s][a] -> policy; rows without mass become uniform.
TimedPolicy policy_from_occupancy(Shape shape, std::span<const double> occupancy);

}  // namespace fairmt
