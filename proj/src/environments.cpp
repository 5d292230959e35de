#include "fairmt/environments.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "fairmt/random.hpp"

namespace fairmt {

using json = nlohmann::json;

TaskedGroupMDP build_riverswim_multitask(const RiverSwimSpec& spec) {
    constexpr std::size_t n = RiverSwimSpec::n_states;
    if (spec.horizon == 0) throw std::invalid_argument("horizon must be positive");
    if (spec.groups.empty()) throw std::invalid_argument("at least one group is required");

    TaskedGroupMDP mdp;
    mdp.shape = {n, RiverSwimSpec::n_actions, spec.horizon};
    mdp.n_tasks = 2;
    const Shape& sh = mdp.shape;

    for (std::size_t z = 0; z < spec.groups.size(); ++z) {
        const auto& g = spec.groups[z];
        for (double p : {g.p_right, g.p_stay, g.p_left})
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("RiverSwim probabilities must lie in [0,1]");
        if (std::abs(g.p_right + g.p_stay + g.p_left - 1.0) > 1e-12)
            throw std::invalid_argument("RiverSwim probabilities of group " + std::to_string(z) + " do not sum to 1");
        if (g.initial_state >= n) throw std::invalid_argument("RiverSwim initial state out of range");

        GroupDynamics dyn;
        dyn.group_id = z;
        dyn.initial_dist.assign(n, 0.0);
        dyn.initial_dist[g.initial_state] = 1.0;
        dyn.transition.assign(sh.cells() * n, 0.0);
        for (std::size_t h = 0; h < sh.horizon; ++h) {
            for (std::size_t s = 0; s < n; ++s) {
                double* left = dyn.transition.data() + sh.row(h, s, RiverSwimSpec::left);
                left[s == 0 ? 0 : s - 1] = 1.0;

                double* right = dyn.transition.data() + sh.row(h, s, RiverSwimSpec::right);
                right[s == n - 1 ? s : s + 1] += g.p_right;
                right[s] += g.p_stay;
                right[s == 0 ? 0 : s - 1] += g.p_left;
            }
        }
        mdp.groups.push_back(std::move(dyn));
    }

    std::vector<double> goal(sh.cells(), 0.0), region(sh.cells(), 0.0);
    for (std::size_t h = 0; h < sh.horizon; ++h) {
        goal[sh.cell(h, n - 1, RiverSwimSpec::right)] = 1.0;
        for (std::size_t s = RiverSwimSpec::region_start; s < n; ++s) region[sh.cell(h, s, RiverSwimSpec::right)] = 1.0;
    }
    mdp.rewards = {std::move(goal), std::move(region)};
    return mdp;
}

namespace {

std::vector<double> dirichlet_row(std::size_t n, Rng& rng) {
    std::vector<double> row(n);
    double total = 0.0;
    for (auto& v : row) {
        v = -std::log(1.0 - rng.uniform());
        total += v;
    }
    for (auto& v : row) v /= total;
    return row;
}

}  // namespace

TaskedGroupMDP random_small_mdp(const RandomMdpDims& dims, std::uint64_t seed) {
    Rng rng(seed);
    TaskedGroupMDP mdp;
    mdp.shape = {dims.n_states, dims.n_actions, dims.horizon};
    mdp.n_tasks = dims.n_tasks;
    const Shape& sh = mdp.shape;
    for (std::size_t z = 0; z < dims.n_groups; ++z) {
        GroupDynamics g;
        g.group_id = z;
        g.initial_dist = dirichlet_row(sh.n_states, rng);
        g.transition.reserve(sh.cells() * sh.n_states);
        for (std::size_t c = 0; c < sh.cells(); ++c) {
            auto row = dirichlet_row(sh.n_states, rng);
            g.transition.insert(g.transition.end(), row.begin(), row.end());
        }
        mdp.groups.push_back(std::move(g));
    }
    for (std::size_t m = 0; m < dims.n_tasks; ++m) {
        std::vector<double> r(sh.cells());
        for (auto& v : r) v = rng.uniform();
        mdp.rewards.push_back(std::move(r));
    }
    return mdp;
}

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path + "." + key + ": missing field");
    return *it;
}

std::size_t positive(const json& obj, const std::string& key, const std::string& path) {
    const json& v = field(obj, key, path);
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
        throw ConfigError(path + "." + key + ": expected a positive integer");
    return v.get<std::size_t>();
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

// Flattens a nested array of the given extents into `out`.
void flatten(const json& v, std::span<const std::size_t> extents, const std::string& path, std::vector<double>& out) {
    if (extents.empty()) {
        out.push_back(number(v, path));
        return;
    }
    if (!v.is_array() || v.size() != extents[0])
        throw ConfigError(path + ": expected an array of length " + std::to_string(extents[0]));
    for (std::size_t i = 0; i < extents[0]; ++i)
        flatten(v[i], extents.subspan(1), path + "[" + std::to_string(i) + "]", out);
}

std::vector<double> replicate(const std::vector<double>& per_step, std::size_t horizon) {
    std::vector<double> out;
    out.reserve(per_step.size() * horizon);
    for (std::size_t h = 0; h < horizon; ++h) out.insert(out.end(), per_step.begin(), per_step.end());
    return out;
}

TaskedGroupMDP riverswim_from_json(const json& doc) {
    RiverSwimSpec spec;
    spec.horizon = positive(doc, "horizon", "$");
    const json& groups = field(doc, "groups", "$");
    if (!groups.is_array() || groups.empty()) throw ConfigError("$.groups: expected a non-empty array");
    spec.groups.clear();
    for (std::size_t z = 0; z < groups.size(); ++z) {
        const std::string path = "$.groups[" + std::to_string(z) + "]";
        RiverSwimGroup g;
        g.p_right = number(field(groups[z], "p_right", path), path + ".p_right");
        g.p_stay = number(field(groups[z], "p_stay", path), path + ".p_stay");
        g.p_left = number(field(groups[z], "p_left", path), path + ".p_left");
        if (groups[z].contains("initial_state")) {
            const json& s = groups[z]["initial_state"];
            if (!s.is_number_unsigned()) throw ConfigError(path + ".initial_state: expected a state index");
            g.initial_state = s.get<std::size_t>();
        }
        spec.groups.push_back(g);
    }
    try {
        return build_riverswim_multitask(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("riverswim generator: ") + e.what());
    }
}

}  // namespace

TaskedGroupMDP parse_env_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("syntax error: ") + e.what());
    }
    const json& version = field(doc, "format_version", "$");
    if (!version.is_number_integer() || version.get<int>() != kEnvFormatVersion)
        throw ConfigError("unsupported format_version " + version.dump() + " (supported: " +
                          std::to_string(kEnvFormatVersion) + ")");

    TaskedGroupMDP mdp;
    if (doc.contains("generator")) {
        const json& gen = doc["generator"];
        if (gen != "riverswim") throw ConfigError("$.generator: unknown generator " + gen.dump());
        mdp = riverswim_from_json(doc);
    } else {
        Shape sh{positive(doc, "n_states", "$"), positive(doc, "n_actions", "$"), positive(doc, "horizon", "$")};
        mdp.shape = sh;
        const json& tasks = field(doc, "tasks", "$");
        if (!tasks.is_array() || tasks.empty()) throw ConfigError("$.tasks: expected a non-empty array");
        for (std::size_t m = 0; m < tasks.size(); ++m) {
            const std::string path = "$.tasks[" + std::to_string(m) + "]";
            std::vector<double> r;
            if (tasks[m].contains("rewards")) {
                const std::size_t ext[] = {sh.horizon, sh.n_states, sh.n_actions};
                flatten(tasks[m]["rewards"], ext, path + ".rewards", r);
            } else if (tasks[m].contains("stationary_rewards")) {
                const std::size_t ext[] = {sh.n_states, sh.n_actions};
                std::vector<double> once;
                flatten(tasks[m]["stationary_rewards"], ext, path + ".stationary_rewards", once);
                r = replicate(once, sh.horizon);
            } else {
                throw ConfigError(path + ": needs 'rewards' or 'stationary_rewards'");
            }
            mdp.rewards.push_back(std::move(r));
        }
        mdp.n_tasks = mdp.rewards.size();

        const json& groups = field(doc, "groups", "$");
        if (!groups.is_array() || groups.empty()) throw ConfigError("$.groups: expected a non-empty array");
        for (std::size_t z = 0; z < groups.size(); ++z) {
            const std::string path = "$.groups[" + std::to_string(z) + "]";
            GroupDynamics g;
            g.group_id = z;
            const std::size_t init_ext[] = {sh.n_states};
            flatten(field(groups[z], "initial_dist", path), init_ext, path + ".initial_dist", g.initial_dist);
            if (groups[z].contains("transition")) {
                const std::size_t ext[] = {sh.horizon, sh.n_states, sh.n_actions, sh.n_states};
                flatten(groups[z]["transition"], ext, path + ".transition", g.transition);
            } else if (groups[z].contains("stationary_transition")) {
                const std::size_t ext[] = {sh.n_states, sh.n_actions, sh.n_states};
                std::vector<double> once;
                flatten(groups[z]["stationary_transition"], ext, path + ".stationary_transition", once);
                g.transition = replicate(once, sh.horizon);
            } else {
                throw ConfigError(path + ": needs 'transition' or 'stationary_transition'");
            }
            mdp.groups.push_back(std::move(g));
        }
    }

    auto report = validate_mdp(mdp);
    if (!report.empty()) throw ConfigError("environment failed validation:\n" + format_violations(report));
    return mdp;
}

TaskedGroupMDP load_env_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open environment config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_env_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string serialize_env_config(const TaskedGroupMDP& mdp) {
    const Shape& sh = mdp.shape;
    json doc;
    doc["format_version"] = kEnvFormatVersion;
    doc["n_states"] = sh.n_states;
    doc["n_actions"] = sh.n_actions;
    doc["horizon"] = sh.horizon;
    doc["tasks"] = json::array();
    for (const auto& r : mdp.rewards) {
        json steps = json::array();
        for (std::size_t h = 0; h < sh.horizon; ++h) {
            json states = json::array();
            for (std::size_t s = 0; s < sh.n_states; ++s) {
                json actions = json::array();
                for (std::size_t a = 0; a < sh.n_actions; ++a) actions.push_back(r[sh.cell(h, s, a)]);
                states.push_back(std::move(actions));
            }
            steps.push_back(std::move(states));
        }
        doc["tasks"].push_back({{"rewards", std::move(steps)}});
    }
    doc["groups"] = json::array();
    for (const auto& g : mdp.groups) {
        json steps = json::array();
        for (std::size_t h = 0; h < sh.horizon; ++h) {
            json states = json::array();
            for (std::size_t s = 0; s < sh.n_states; ++s) {
                json actions = json::array();
                for (std::size_t a = 0; a < sh.n_actions; ++a) {
                    const double* row = g.transition.data() + sh.row(h, s, a);
                    actions.push_back(std::vector<double>(row, row + sh.n_states));
                }
                states.push_back(std::move(actions));
            }
            steps.push_back(std::move(states));
        }
        doc["groups"].push_back({{"initial_dist", g.initial_dist}, {"transition", std::move(steps)}});
    }
    return doc.dump(1) + "\n";
}

void save_env_config(const TaskedGroupMDP& mdp, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << serialize_env_config(mdp);
}

std::string serialize_riverswim_config(const RiverSwimSpec& spec) {
    json doc;
    doc["format_version"] = kEnvFormatVersion;
    doc["generator"] = "riverswim";
    doc["horizon"] = spec.horizon;
    doc["groups"] = json::array();
    for (const auto& g : spec.groups)
        doc["groups"].push_back(
            {{"p_right", g.p_right}, {"p_stay", g.p_stay}, {"p_left", g.p_left}, {"initial_state", g.initial_state}});
    return doc.dump(2) + "\n";
}

}  // namespace fairmt
