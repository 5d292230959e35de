#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairmt/estimation.hpp"
#include "fairmt/lp.hpp"
#include "fairmt/mdp.hpp"
#include "fairmt/rewards.hpp"

namespace fairmt {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Joint LP over per-group occupancy measures d_z(h,s,a) >= 0.
///
/// Rows, in order:
///   flow      (z,h,s):  sum_a d_z(h,s,a) - sum_{s',a'} P_z(s|s',a') d_z(h-1,s',a') = [h=0] mu_z(s)
///   fairness  (m,i,j):  sum d_i * upper_{m,i} - sum d_j * lower_{m,j} <= epsilon, for i != j
/// Objective: maximize sum over active tasks and groups of d_z * objective_{m,z}.
///
/// Groups only interact through the fairness rows.
class OccupancyLp {
public:
    struct FairnessRow {
        std::size_t task;
        std::size_t upper_group;  // evaluated with the upper (optimistic) reward
        std::size_t lower_group;  // evaluated with the lower (pessimistic) reward
        std::size_t row;
    };

    const Shape& shape() const { return shape_; }
    std::size_t n_groups() const { return n_groups_; }
    const LinearProgram& program() const { return program_; }
    const std::vector<FairnessRow>& fairness_rows() const { return fairness_; }
    std::size_t n_flow_rows() const { return n_groups_ * shape_.horizon * shape_.n_states; }
    double epsilon() const { return epsilon_; }

    std::size_t variable(std::size_t z, std::size_t h, std::size_t s, std::size_t a) const {
        return z * shape_.cells() + shape_.cell(h, s, a);
    }
    /// Occupancy block of group z from a solution vector, [h][s][a].
    std::vector<double> occupancy(const std::vector<double>& x, std::size_t z) const;
    /// Extracted per-group policies of a solution.
    TimedPolicySet policies(const std::vector<double>& x) const;

    /// Generic construction. `transitions[z]` is [h][s][a][s'] (rows may be
    /// sub-stochastic); reward variants are indexed [task][group].
    static OccupancyLp build(Shape shape, std::span<const std::vector<double>> initial,
                             std::span<const std::vector<double>> transitions, const RewardVariant& upper,
                             const RewardVariant& lower, const RewardVariant& objective, double epsilon,
                             std::span<const std::size_t> tasks);

private:
    Shape shape_;
    std::size_t n_groups_ = 0;
    double epsilon_ = 0.0;
    LinearProgram program_;
    std::vector<FairnessRow> fairness_;
};

/// Every task index 0..n-1.
std::vector<std::size_t> all_tasks(std::size_t n_tasks);

/// LP of the per-episode problem: empirical transitions in the flow rows,
/// optimistic/pessimistic rewards in the fairness rows, exploration reward
/// in the objective. `tasks` selects the constrained and rewarded tasks.
OccupancyLp build_lp(const EstimatorState& est, std::span<const std::vector<double>> initial,
                     const RewardVariants& variants, double epsilon, std::span<const std::size_t> tasks);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<std::vector<double>> occupancies;  // per group, [h][s][a]
    double objective_value = 0.0;
    std::vector<double> x;
};

LpSolution solve_lp(const OccupancyLp& lp, const LpBackend& backend);

/// True when pi0 must be played: for some task and ordered pair (i, j),
/// J(pi0_i; P_hat_i, upper) - J(pi0_j; P_hat_j, lower) > (epsilon + epsilon0) / 2.
bool fallback_check(const EstimatorState& est, std::span<const std::vector<double>> initial,
                    const TimedPolicySet& pi0, const RewardVariants& variants, double epsilon, double epsilon0,
                    std::span<const std::size_t> tasks);

enum class PlanMode { fallback, lp };

const char* to_string(PlanMode mode);

struct PlannerConfig {
    double epsilon = 0.3;
    double epsilon0 = 0.0;
    AlphaRule alpha_rule = AlphaRule::base;
    std::vector<std::size_t> tasks;  // constrained/rewarded tasks; empty means all
};

struct EpisodePlan {
    TimedPolicySet policies;
    PlanMode mode = PlanMode::fallback;
    /// The fallback test passed but the LP came back infeasible.
    bool infeasible_anomaly = false;
    double lp_objective = 0.0;
};

/// Hook that receives every LP built by plan_episode (used for --dump-lp).
using LpObserver = std::function<void(const OccupancyLp&)>;

EpisodePlan plan_episode(const EstimatorState& est, std::span<const std::vector<double>> initial,
                         const TimedPolicySet& pi0, const PlannerConfig& cfg, const LpBackend& backend,
                         const LpObserver& observer = {});

}  // namespace fairmt
