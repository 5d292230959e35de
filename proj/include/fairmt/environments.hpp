#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairmt/mdp.hpp"

namespace fairmt {

/// Rightward-swim probabilities of one group. Swimming left is deterministic.
struct RiverSwimGroup {
    double p_right = 0.6;  // move one state right
    double p_stay = 0.3;   // stay put
    double p_left = 0.1;   // slip one state left
    std::size_t initial_state = 0;

    bool operator==(const RiverSwimGroup&) const = default;
};

struct RiverSwimSpec {
    static constexpr std::size_t n_states = 7;
    static constexpr std::size_t n_actions = 2;
    static constexpr std::size_t left = 0;
    static constexpr std::size_t right = 1;
    /// First state whose rightward action pays in the second task.
    static constexpr std::size_t region_start = 3;

    std::size_t horizon = 20;
    std::vector<RiverSwimGroup> groups{{0.6, 0.3, 0.1, 0}, {0.5, 0.35, 0.15, 0}};
};

/// Two-task RiverSwim, one dynamics per group.
///   task 0: reward 1 for swimming right in the rightmost state;
///   task 1: reward 1 for swimming right in any state >= 3.
/// At the boundaries the blocked move folds into "stay".
TaskedGroupMDP build_riverswim_multitask(const RiverSwimSpec& spec);

struct RandomMdpDims {
    std::size_t n_states = 2;
    std::size_t n_actions = 2;
    std::size_t horizon = 2;
    std::size_t n_tasks = 2;
    std::size_t n_groups = 2;
};

/// Random instance: Dirichlet(1) transition rows and initial distributions,
/// uniform [0,1] rewards. Deterministic per seed.
TaskedGroupMDP random_small_mdp(const RandomMdpDims& dims, std::uint64_t seed);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kEnvFormatVersion = 1;

/// Parses an environment config (JSON text). Throws ConfigError on syntax,
/// schema, version or validation problems.
TaskedGroupMDP parse_env_config(const std::string& text);
TaskedGroupMDP load_env_config(const std::filesystem::path& path);

/// Full-table form of the config.
std::string serialize_env_config(const TaskedGroupMDP& mdp);
void save_env_config(const TaskedGroupMDP& mdp, const std::filesystem::path& path);
/// Generator form: {"generator": "riverswim", ...}.
std::string serialize_riverswim_config(const RiverSwimSpec& spec);

}  // namespace fairmt
