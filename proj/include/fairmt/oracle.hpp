#pragma once

#include "fairmt/evaluation.hpp"
#include "fairmt/lp.hpp"
#include "fairmt/mdp.hpp"

namespace fairmt {

/// True-model fair optimum: the comparator policy list for regret.
struct RegretOracle {
    ReturnTable returns;       // [task][group] returns of the optimal fair policy list
    double objective = 0.0;    // sum of all entries of `returns`
    double max_gap = 0.0;      // its largest true fairness gap
    TimedPolicySet policies;
};

/// Solves the occupancy LP with true transitions and true rewards (no
/// bonuses). Throws SolverError when no fair policy list exists.
RegretOracle compute_fair_optimum(const TaskedGroupMDP& mdp, double epsilon, const LpBackend& backend);
RegretOracle compute_fair_optimum(const TaskedGroupMDP& mdp, double epsilon);

}  // namespace fairmt
