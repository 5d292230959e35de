#include "fairmt/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fairmt {

TimedPolicy::TimedPolicy(Shape shape) : shape_(shape), probs_(shape.cells(), 0.0) {}

TimedPolicy::TimedPolicy(Shape shape, std::vector<double> probs) : shape_(shape), probs_(std::move(probs)) {
    if (probs_.size() != shape_.cells())
        throw DimensionError("policy table size does not match H*|S|*|A|");
}

TimedPolicy TimedPolicy::uniform(Shape shape) {
    return TimedPolicy(shape, std::vector<double>(shape.cells(), 1.0 / static_cast<double>(shape.n_actions)));
}

TimedPolicy TimedPolicy::constant_action(Shape shape, std::size_t action) {
    if (action >= shape.n_actions) throw DimensionError("action index out of range");
    TimedPolicy policy(shape);
    for (std::size_t h = 0; h < shape.horizon; ++h)
        for (std::size_t s = 0; s < shape.n_states; ++s) policy.probs_[shape.cell(h, s, action)] = 1.0;
    return policy;
}

bool TimedPolicy::is_valid(double tol) const {
    if (probs_.size() != shape_.cells()) return false;
    for (std::size_t h = 0; h < shape_.horizon; ++h) {
        for (std::size_t s = 0; s < shape_.n_states; ++s) {
            auto r = row(h, s);
            if (std::any_of(r.begin(), r.end(), [](double p) { return !(p >= 0.0); })) return false;
            if (std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0) > tol) return false;
        }
    }
    return true;
}

namespace {

std::string where(std::initializer_list<std::pair<const char*, std::size_t>> parts) {
    std::ostringstream out;
    out << '(';
    bool first = true;
    for (const auto& [name, value] : parts) {
        if (!first) out << ',';
        out << name << '=' << value;
        first = false;
    }
    out << ')';
    return out.str();
}

void check_simplex(std::span<const double> row, double tol, const std::string& location,
                   std::vector<Violation>& out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
            std::ostringstream msg;
            msg << "entry " << i << " is " << row[i] << " (must be a finite nonnegative probability)";
            out.push_back({location, msg.str()});
            return;
        }
        sum += row[i];
    }
    if (std::abs(sum - 1.0) > tol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "probabilities sum to " << sum << " instead of 1";
        out.push_back({location, msg.str()});
    }
}

}  // namespace

std::vector<Violation> validate_mdp(const TaskedGroupMDP& mdp, double tol) {
    std::vector<Violation> report;
    const Shape& sh = mdp.shape;
    if (sh.n_states == 0 || sh.n_actions == 0 || sh.horizon == 0) {
        report.push_back({"shape", "n_states, n_actions and horizon must be positive"});
        return report;
    }
    if (mdp.n_tasks == 0) report.push_back({"tasks", "at least one task is required"});
    if (mdp.rewards.size() != mdp.n_tasks)
        report.push_back({"tasks", "reward table count does not match n_tasks"});
    if (mdp.groups.empty()) report.push_back({"groups", "at least one group is required"});

    for (std::size_t m = 0; m < mdp.rewards.size(); ++m) {
        const auto& r = mdp.rewards[m];
        if (r.size() != sh.cells()) {
            report.push_back({where({{"m", m}}), "reward table has wrong size"});
            continue;
        }
        for (std::size_t h = 0; h < sh.horizon; ++h)
            for (std::size_t s = 0; s < sh.n_states; ++s)
                for (std::size_t a = 0; a < sh.n_actions; ++a) {
                    double v = r[sh.cell(h, s, a)];
                    if (!(v >= 0.0 && v <= 1.0)) {
                        std::ostringstream msg;
                        msg << "reward " << v << " outside [0,1]";
                        report.push_back({where({{"m", m}, {"h", h}, {"s", s}, {"a", a}}), msg.str()});
                    }
                }
    }

    for (std::size_t z = 0; z < mdp.groups.size(); ++z) {
        const auto& g = mdp.groups[z];
        if (g.initial_dist.size() != sh.n_states) {
            report.push_back({where({{"z", z}}), "initial_dist has wrong size"});
        } else {
            check_simplex(g.initial_dist, tol, where({{"z", z}}) + " initial_dist", report);
        }
        if (g.transition.size() != sh.cells() * sh.n_states) {
            report.push_back({where({{"z", z}}), "transition table has wrong size"});
            continue;
        }
        for (std::size_t h = 0; h < sh.horizon; ++h)
            for (std::size_t s = 0; s < sh.n_states; ++s)
                for (std::size_t a = 0; a < sh.n_actions; ++a)
                    check_simplex({g.transition.data() + sh.row(h, s, a), sh.n_states}, tol,
                                  where({{"z", z}, {"h", h}, {"s", s}, {"a", a}}) + " transition", report);
    }
    return report;
}

std::string format_violations(const std::vector<Violation>& violations) {
    std::ostringstream out;
    for (const auto& v : violations) out << v.location << ": " << v.message << '\n';
    return out.str();
}

void require_valid(const TaskedGroupMDP& mdp) {
    auto report = validate_mdp(mdp);
    if (!report.empty()) throw std::invalid_argument("invalid MDP:\n" + format_violations(report));
}

void check_policy_shape(const TaskedGroupMDP& mdp, const TimedPolicySet& policies) {
    if (policies.size() != mdp.n_groups())
        throw DimensionError("policy list has " + std::to_string(policies.size()) + " entries for " +
                             std::to_string(mdp.n_groups()) + " groups");
    for (const auto& p : policies)
        if (p.shape() != mdp.shape) throw DimensionError("policy shape does not match MDP shape");
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last_positive = i;
        if (u < acc) return i;
    }
    // u landed in the rounding slack at the top of the CDF
    return last_positive;
}

Trajectory sample_trajectory(const TaskedGroupMDP& mdp, std::size_t group, const TimedPolicySet& policies,
                             Rng& rng) {
    check_policy_shape(mdp, policies);
    if (group >= mdp.n_groups()) throw DimensionError("group index out of range");
    const Shape& sh = mdp.shape;
    const auto& dyn = mdp.groups[group];
    const auto& policy = policies[group];

    Trajectory traj;
    traj.group_id = group;
    traj.steps.reserve(sh.horizon);
    std::size_t s = sample_index(dyn.initial_dist, rng);
    for (std::size_t h = 0; h < sh.horizon; ++h) {
        const std::size_t a = sample_index(policy.row(h, s), rng);
        const std::size_t next =
            sample_index(std::span<const double>(dyn.transition.data() + sh.row(h, s, a), sh.n_states), rng);
        Transition t{h, s, a, next, std::vector<double>(mdp.n_tasks)};
        for (std::size_t m = 0; m < mdp.n_tasks; ++m) t.rewards[m] = mdp.rewards[m][sh.cell(h, s, a)];
        traj.steps.push_back(std::move(t));
        s = next;
    }
    return traj;
}

TimedPolicy policy_from_occupancy(Shape shape, std::span<const double> occupancy) {
    if (occupancy.size() != shape.cells()) throw DimensionError("occupancy table size does not match shape");
    TimedPolicy policy(shape);
    const double uniform = 1.0 / static_cast<double>(shape.n_actions);
    for (std::size_t h = 0; h < shape.horizon; ++h) {
        for (std::size_t s = 0; s < shape.n_states; ++s) {
            auto out = policy.row(h, s);
            double mass = 0.0;
            for (std::size_t a = 0; a < shape.n_actions; ++a)
                mass += std::max(0.0, occupancy[shape.cell(h, s, a)]);
            if (mass < 1e-12) {
                std::fill(out.begin(), out.end(), uniform);
                continue;
            }
            for (std::size_t a = 0; a < shape.n_actions; ++a)
                out[a] = std::max(0.0, occupancy[shape.cell(h, s, a)]) / mass;
        }
    }
    return policy;
}

}  // namespace fairmt
