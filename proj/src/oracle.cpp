#include "fairmt/oracle.hpp"

#include "fairmt/planner.hpp"

namespace fairmt {

RegretOracle compute_fair_optimum(const TaskedGroupMDP& mdp, double epsilon, const LpBackend& backend) {
    require_valid(mdp);
    const Shape& sh = mdp.shape;
    std::vector<std::vector<double>> initial, transitions, zero_radius(mdp.n_groups(),
                                                                       std::vector<double>(sh.cells(), 0.0));
    for (const auto& g : mdp.groups) {
        initial.push_back(g.initial_dist);
        transitions.push_back(g.transition);
    }
    const RewardVariant truth = shifted_reward(RewardKind::exploration, sh, mdp.rewards, zero_radius, 0.0);
    const auto tasks = all_tasks(mdp.n_tasks);
    const OccupancyLp lp = OccupancyLp::build(sh, initial, transitions, truth, truth, truth, epsilon, tasks);
    const LpSolution sol = solve_lp(lp, backend);
    if (sol.status != LpStatus::optimal)
        throw SolverError(std::string("fair optimum LP is ") + to_string(sol.status));

    RegretOracle oracle;
    oracle.policies = lp.policies(sol.x);
    oracle.returns = return_table(mdp, oracle.policies);
    oracle.objective = oracle.returns.total();
    oracle.max_gap = fairness_gaps(oracle.returns).max_gap;
    return oracle;
}

RegretOracle compute_fair_optimum(const TaskedGroupMDP& mdp, double epsilon) {
    return compute_fair_optimum(mdp, epsilon, DenseSimplex{});
}

}  // namespace fairmt
