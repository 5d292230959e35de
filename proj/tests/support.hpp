#pragma once

// Small builders shared by the unit tests.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fairmt/environments.hpp"
#include "fairmt/mdp.hpp"
#include "fairmt/random.hpp"

namespace testing {

/// Deterministic chain: state s moves to min(s+1, n-1) under every action;
/// one task rewarding `reward_cell` ([h][s][a] index) with 1.
inline fairmt::TaskedGroupMDP chain(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                                    std::size_t n_groups = 1) {
    fairmt::TaskedGroupMDP mdp;
    mdp.shape = {n_states, n_actions, horizon};
    mdp.n_tasks = 1;
    const auto& sh = mdp.shape;
    for (std::size_t z = 0; z < n_groups; ++z) {
        fairmt::GroupDynamics g;
        g.group_id = z;
        g.initial_dist.assign(n_states, 0.0);
        g.initial_dist[0] = 1.0;
        g.transition.assign(sh.cells() * n_states, 0.0);
        for (std::size_t h = 0; h < horizon; ++h)
            for (std::size_t s = 0; s < n_states; ++s)
                for (std::size_t a = 0; a < n_actions; ++a)
                    g.transition[sh.row(h, s, a) + std::min(s + 1, n_states - 1)] = 1.0;
        mdp.groups.push_back(std::move(g));
    }
    mdp.rewards.assign(1, std::vector<double>(sh.cells(), 0.0));
    return mdp;
}

/// Random stochastic policy (rows drawn uniformly then normalised).
inline fairmt::TimedPolicy random_policy(fairmt::Shape shape, fairmt::Rng& rng) {
    std::vector<double> p(shape.cells());
    for (std::size_t h = 0; h < shape.horizon; ++h)
        for (std::size_t s = 0; s < shape.n_states; ++s) {
            double total = 0.0;
            for (std::size_t a = 0; a < shape.n_actions; ++a) total += p[shape.cell(h, s, a)] = 0.05 + rng.uniform();
            for (std::size_t a = 0; a < shape.n_actions; ++a) p[shape.cell(h, s, a)] /= total;
        }
    return fairmt::TimedPolicy(shape, std::move(p));
}

inline fairmt::TimedPolicySet shared(const fairmt::TimedPolicy& p, std::size_t n_groups) {
    return fairmt::TimedPolicySet(n_groups, p);
}

inline std::vector<std::vector<double>> initial_dists(const fairmt::TaskedGroupMDP& mdp) {
    std::vector<std::vector<double>> out;
    for (const auto& g : mdp.groups) out.push_back(g.initial_dist);
    return out;
}

inline fairmt::TaskedGroupMDP riverswim() { return fairmt::build_riverswim_multitask({}); }

}  // namespace testing

#include <cmath>
#include <stdexcept>

#include "fairmt/estimation.hpp"

namespace testing {

/// Estimator that has seen every cell `visits` times with next-state counts
/// exactly proportional to the true rows (rows must be multiples of 1/visits)
/// and every reward; `c` = 0 makes every radius zero.
inline fairmt::EstimatorState exact_estimator(const fairmt::TaskedGroupMDP& mdp, std::uint64_t visits, double c) {
    const auto& sh = mdp.shape;
    const std::size_t Z = mdp.n_groups();
    std::vector<std::uint64_t> counts(Z * sh.cells(), visits), next(Z * sh.cells() * sh.n_states);
    for (std::size_t z = 0; z < Z; ++z)
        for (std::size_t i = 0; i < sh.cells() * sh.n_states; ++i) {
            const double x = mdp.groups[z].transition[i] * double(visits);
            if (std::abs(x - std::round(x)) > 1e-9) throw std::invalid_argument("row is not a multiple of 1/visits");
            next[z * sh.cells() * sh.n_states + i] = static_cast<std::uint64_t>(std::llround(x));
        }
    std::vector<double> rewards;
    for (const auto& r : mdp.rewards) rewards.insert(rewards.end(), r.begin(), r.end());
    return fairmt::EstimatorState::from_raw(sh, Z, mdp.n_tasks, c, 1.0, counts, next, rewards,
                                            std::vector<std::uint8_t>(sh.cells(), 1));
}

}  // namespace testing
