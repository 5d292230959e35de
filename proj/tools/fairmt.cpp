// Command-line front end: run experiments and write environment configs.
//
//   fairmt run --env env.json --algo multitask --episodes 2000 --epsilon 0.3
//              --epsilon0 0.01 --delta 0.1 --seeds 1,2,3 --out runs/a
//   fairmt make-env riverswim --horizon 20 --out env.json
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairmt/environments.hpp"
#include "fairmt/harness.hpp"
#include "json.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct ConfigFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// {"format_version": 1, "policies": [ [h][s][a] probabilities per group ]}
fairmt::TimedPolicySet load_pi0(const std::string& path, const fairmt::TaskedGroupMDP& mdp) {
    std::ifstream in(path);
    if (!in) throw ConfigFailure("cannot open pi0 file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigFailure(path + ": " + e.what());
    }
    if (doc.value("format_version", 0) != 1) throw ConfigFailure(path + ": unsupported format_version");
    fairmt::TimedPolicySet out;
    try {
        for (const auto& p : doc.at("policies"))
            out.emplace_back(mdp.shape, p.get<std::vector<double>>());
    } catch (const std::exception& e) {
        throw ConfigFailure(path + ": $.policies: " + e.what());
    }
    return out;
}

int run_command(const std::string& env_path, const std::string& algo, std::size_t baseline_task,
                std::size_t episodes, double epsilon, double epsilon0, double delta,
                const std::vector<std::uint64_t>& seeds, const std::string& out, std::size_t parallel, bool dump_lp,
                const std::string& alpha, double radius_scale, const std::string& pi0_path, bool round_robin) {
    fairmt::ExperimentPlan plan;
    try {
        plan.mdp = fairmt::load_env_config(env_path);
        plan.env_label = env_path;
        plan.algo = algo == "baseline" ? fairmt::Algorithm::baseline : fairmt::Algorithm::multitask;
        plan.baseline_task = baseline_task;
        plan.seeds = seeds;
        plan.out_dir = out;
        plan.parallel = parallel;
        plan.dump_lp = dump_lp;
        plan.cfg.n_episodes = episodes;
        plan.cfg.epsilon = epsilon;
        plan.cfg.epsilon0 = epsilon0;
        plan.cfg.delta = delta;
        plan.cfg.radius_scale = radius_scale;
        plan.cfg.alpha_rule = alpha == "lemmaA2" ? fairmt::AlphaRule::task_squared : fairmt::AlphaRule::base;
        plan.cfg.schedule = round_robin ? fairmt::SamplingSchedule::round_robin : fairmt::SamplingSchedule::all_groups;
        if (pi0_path.empty()) {
            const auto safe = fairmt::default_safe_policy(plan.mdp);
            if (safe.certified_gap > epsilon0)
                throw ConfigFailure("default pi0 has true gap " + std::to_string(safe.certified_gap) +
                                    " above --epsilon0; pass --pi0");
            plan.cfg.pi0 = safe.policies;
        } else {
            plan.cfg.pi0 = load_pi0(pi0_path, plan.mdp);
        }
        fairmt::validate_plan(plan);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const auto result = fairmt::run_experiment(plan);
        std::cout << "config " << fairmt::config_hash(plan) << ", fair optimum " << result.oracle.objective << '\n';
        for (const auto& s : result.seeds) {
            std::cout << "seed " << s.seed << ": regret";
            for (double r : s.summary.cumulative_regret) std::cout << ' ' << r;
            std::cout << ", max gap";
            for (double g : s.summary.max_gap) std::cout << ' ' << g;
            std::cout << ", fallback " << s.summary.fallback_episodes << '/' << episodes << ", "
                      << s.csv.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-task group-fair RL experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the learner over several seeds and write CSV logs");
    std::string env_path, algo = "multitask", out, alpha = "s33", pi0_path;
    std::size_t baseline_task = 0, episodes = 0, parallel = 1;
    double epsilon = 0.0, epsilon0 = 0.0, delta = 0.1, radius_scale = 1.0;
    std::vector<std::uint64_t> seeds;
    bool dump_lp = false, round_robin = false;
    run->add_option("--env", env_path, "environment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--algo", algo)->check(CLI::IsMember({"multitask", "baseline"}));
    run->add_option("--baseline-task", baseline_task, "constrained task of the baseline (0-based)");
    run->add_option("--episodes", episodes, "K")->required();
    run->add_option("--epsilon", epsilon)->required();
    run->add_option("--epsilon0", epsilon0)->required();
    run->add_option("--delta", delta);
    run->add_option("--seeds", seeds, "comma-separated seeds")->required()->delimiter(',');
    run->add_option("--out", out, "output directory")->required();
    run->add_option("--parallel", parallel, "seeds run concurrently");
    run->add_flag("--dump-lp", dump_lp, "write every planning LP as MPS under <out>/lp");
    run->add_option("--alpha-variant", alpha)->check(CLI::IsMember({"s33", "lemmaA2"}));
    run->add_option("--radius-scale", radius_scale, "multiplier on every confidence radius");
    run->add_option("--pi0", pi0_path, "initial fair policy list (JSON); default: best constant/uniform policy")
        ->check(CLI::ExistingFile);
    run->add_flag("--round-robin", round_robin, "one group per episode instead of all groups");

    auto* make_env = app.add_subcommand("make-env", "write an environment config");
    std::string generator = "riverswim", env_out;
    std::size_t horizon = 20;
    std::vector<double> group_a{0.6, 0.3, 0.1}, group_b{0.5, 0.35, 0.15};
    bool full = false;
    make_env->add_option("generator", generator)->check(CLI::IsMember({"riverswim"}));
    make_env->add_option("--horizon", horizon);
    make_env->add_option("--group-a", group_a, "p_right,p_stay,p_left")->delimiter(',')->expected(3);
    make_env->add_option("--group-b", group_b, "p_right,p_stay,p_left")->delimiter(',')->expected(3);
    make_env->add_flag("--full", full, "write full transition/reward tables instead of the generator form");
    make_env->add_option("--out", env_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (run->parsed())
        return run_command(env_path, algo, baseline_task, episodes, epsilon, epsilon0, delta, seeds, out, parallel,
                           dump_lp, alpha, radius_scale, pi0_path, round_robin);

    try {
        fairmt::RiverSwimSpec spec;
        spec.horizon = horizon;
        spec.groups = {{group_a[0], group_a[1], group_a[2], 0}, {group_b[0], group_b[1], group_b[2], 0}};
        const auto mdp = fairmt::build_riverswim_multitask(spec);
        std::ofstream f(env_out);
        f << (full ? fairmt::serialize_env_config(mdp) : fairmt::serialize_riverswim_config(spec)) << '\n';
        if (!f) throw std::runtime_error("cannot write " + env_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "make-env failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
