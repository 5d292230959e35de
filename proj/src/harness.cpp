#include "fairmt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "fairmt/environments.hpp"
#include "json.hpp"

#ifndef FAIRMT_VERSION
#define FAIRMT_VERSION "0.0.0"
#endif

namespace fairmt {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* const kCodeVersion = "fairmt " FAIRMT_VERSION;

namespace {

constexpr int kManifestVersion = 1;

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_real(std::string_view text, std::size_t line, const std::string& column) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw CsvError("line " + std::to_string(line) + ", column " + column + ": not a number: '" +
                       std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

const char* alpha_name(AlphaRule rule) { return rule == AlphaRule::base ? "s33" : "lemmaA2"; }

json policy_json(const TimedPolicySet& policies) {
    json out = json::array();
    for (const auto& p : policies) out.push_back(p.probs());
    return out;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Removes files (and directories this run created) when a run fails.
class OutputGuard {
public:
    explicit OutputGuard(const fs::path& dir) {
        fs::path p = dir;
        while (!p.empty() && !fs::exists(p)) {
            created_dirs_.push_back(p);
            if (p == p.parent_path()) break;
            p = p.parent_path();
        }
        fs::create_directories(dir);
    }
    void track(const fs::path& file) {
        std::lock_guard<std::mutex> lock(mu_);
        files_.push_back(file);
    }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& f : files_) fs::remove(f, ec);
        // innermost first; only directories that are empty again
        for (const auto& d : created_dirs_) fs::remove(d, ec);
    }

private:
    std::mutex mu_;
    std::vector<fs::path> files_;
    std::vector<fs::path> created_dirs_;
    bool committed_ = false;
};

}  // namespace

const char* to_string(Algorithm algo) { return algo == Algorithm::multitask ? "multitask" : "baseline"; }

void validate_plan(const ExperimentPlan& plan) {
    if (plan.seeds.empty()) throw std::invalid_argument("at least one seed is required");
    std::vector<std::uint64_t> sorted = plan.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("seeds must be distinct");
    if (plan.cfg.n_episodes < 1) throw std::invalid_argument("K must be at least 1");
    if (plan.parallel < 1) throw std::invalid_argument("--parallel must be at least 1");
    if (plan.algo == Algorithm::baseline && plan.baseline_task >= plan.mdp.n_tasks)
        throw std::invalid_argument("baseline task " + std::to_string(plan.baseline_task) + " out of range (M=" +
                                    std::to_string(plan.mdp.n_tasks) + ")");
    if (plan.out_dir.empty()) throw std::invalid_argument("an output directory is required");
    require_valid(plan.mdp);
    validate_config(plan.cfg, plan.mdp);
}

std::string config_hash(const ExperimentPlan& plan) {
    json canon;
    canon["env"] = json::parse(serialize_env_config(plan.mdp));
    canon["algo"] = to_string(plan.algo);
    canon["baseline_task"] = plan.algo == Algorithm::baseline ? json(plan.baseline_task) : json(nullptr);
    canon["episodes"] = plan.cfg.n_episodes;
    canon["epsilon"] = plan.cfg.epsilon;
    canon["epsilon0"] = plan.cfg.epsilon0;
    canon["delta"] = plan.cfg.delta;
    canon["alpha_variant"] = alpha_name(plan.cfg.alpha_rule);
    canon["radius_scale"] = plan.cfg.radius_scale;
    canon["schedule"] = plan.cfg.schedule == SamplingSchedule::all_groups ? "all_groups" : "round_robin";
    canon["pi0"] = policy_json(plan.cfg.pi0);
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canon.dump());
    return hex.str();
}

RegretCurve regret_curve(const std::vector<EpisodeRecord>& records, const RegretOracle& oracle) {
    const std::size_t n_tasks = oracle.returns.n_tasks();
    const std::size_t n_groups = oracle.returns.n_groups();
    RegretCurve curve;
    curve.per_task.assign(n_tasks, std::vector<double>(records.size(), 0.0));
    curve.summed.assign(records.size(), 0.0);
    std::vector<double> acc(n_tasks, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < records.size(); ++k) {
        for (std::size_t m = 0; m < n_tasks; ++m) {
            double inc = 0.0;
            for (std::size_t z = 0; z < n_groups; ++z) inc += oracle.returns.at(m, z) - records[k].returns.at(m, z);
            acc[m] += inc;
            total += inc;
            curve.per_task[m][k] = acc[m];
        }
        curve.summed[k] = total;
    }
    return curve;
}

std::string csv_header(std::size_t n_tasks, std::size_t n_groups) {
    std::string h = "episode,mode";
    for (std::size_t m = 0; m < n_tasks; ++m)
        for (std::size_t z = 0; z < n_groups; ++z)
            h += ",return_t" + std::to_string(m) + "_g" + std::to_string(z);
    for (std::size_t m = 0; m < n_tasks; ++m)
        for (const auto& [i, j] : group_pairs(n_groups))
            h += ",gap_t" + std::to_string(m) + "_g" + std::to_string(i) + "_g" + std::to_string(j);
    for (std::size_t m = 0; m < n_tasks; ++m) h += ",regret_t" + std::to_string(m);
    return h;
}

void write_csv(std::ostream& out, const std::vector<EpisodeRecord>& records, std::size_t n_tasks,
               std::size_t n_groups) {
    const std::size_t n_pairs = group_pairs(n_groups).size();
    out << csv_header(n_tasks, n_groups) << '\n';
    std::string line;
    for (const auto& rec : records) {
        if (rec.returns.n_tasks() != n_tasks || rec.returns.n_groups() != n_groups ||
            rec.gaps.size() != n_tasks * n_pairs || rec.regret.size() != n_tasks)
            throw std::invalid_argument("record dimensions differ from the CSV layout");
        line = std::to_string(rec.episode);
        line += ',';
        line += to_string(rec.mode);
        for (double v : rec.returns.values()) line += ',' + format_real(v);
        for (double v : rec.gaps) line += ',' + format_real(v);
        for (double v : rec.regret) line += ',' + format_real(v);
        out << line << '\n';
    }
}

CsvLog parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty CSV");
    const auto head = split(line);
    if (head.size() < 2 || head[0] != "episode" || head[1] != "mode")
        throw CsvError("line 1: header must start with episode,mode");

    CsvLog log;
    std::size_t n_returns = 0;
    while (2 + n_returns < head.size() && head[2 + n_returns].substr(0, 7) == "return_") ++n_returns;
    std::size_t n_regret = 0;
    while (n_regret < head.size() && head[head.size() - 1 - n_regret].substr(0, 7) == "regret_") ++n_regret;
    log.n_tasks = n_regret;
    if (log.n_tasks == 0 || n_returns % log.n_tasks != 0) throw CsvError("line 1: cannot infer task/group counts");
    log.n_groups = n_returns / log.n_tasks;
    if (line != csv_header(log.n_tasks, log.n_groups))
        throw CsvError("line 1: header does not match the schema for M=" + std::to_string(log.n_tasks) +
                       ", groups=" + std::to_string(log.n_groups));
    const std::size_t n_pairs = group_pairs(log.n_groups).size();

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != head.size())
            throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(head.size()) +
                           " fields, got " + std::to_string(f.size()));
        EpisodeRecord rec;
        auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), rec.episode);
        if (res.ec != std::errc() || res.ptr != f[0].data() + f[0].size())
            throw CsvError("line " + std::to_string(line_no) + ", column episode: not an integer");
        if (f[1] == "fallback") rec.mode = PlanMode::fallback;
        else if (f[1] == "lp") rec.mode = PlanMode::lp;
        else throw CsvError("line " + std::to_string(line_no) + ", column mode: unknown mode '" + std::string(f[1]) + "'");
        std::size_t c = 2;
        rec.returns = ReturnTable(log.n_tasks, log.n_groups);
        for (std::size_t m = 0; m < log.n_tasks; ++m)
            for (std::size_t z = 0; z < log.n_groups; ++z, ++c)
                rec.returns.at(m, z) = parse_real(f[c], line_no, std::string(head[c]));
        for (std::size_t p = 0; p < log.n_tasks * n_pairs; ++p, ++c)
            rec.gaps.push_back(parse_real(f[c], line_no, std::string(head[c])));
        for (std::size_t m = 0; m < log.n_tasks; ++m, ++c)
            rec.regret.push_back(parse_real(f[c], line_no, std::string(head[c])));
        log.records.push_back(std::move(rec));
    }
    return log;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string seed_file_name(std::uint64_t seed) { return "seed_" + std::to_string(seed) + ".csv"; }

namespace {

SeedOutcome run_seed(const ExperimentPlan& plan, std::uint64_t seed, const RegretOracle& oracle, OutputGuard& guard) {
    std::vector<std::size_t> tasks;
    if (plan.algo == Algorithm::baseline) tasks = {plan.baseline_task};
    FairLearner learner(plan.mdp, plan.cfg, seed, tasks);
    const DenseSimplex backend;

    LpObserver observer;
    fs::path lp_dir = plan.out_dir / "lp";
    if (plan.dump_lp) {
        observer = [&](const OccupancyLp& lp) {
            const fs::path file =
                lp_dir / ("seed_" + std::to_string(seed) + "_ep_" + std::to_string(learner.episodes_done() + 1) + ".mps");
            std::ofstream out(file);
            if (out) guard.track(file);
            write_mps(lp.program(), out, "FAIRLP");
            if (!out) throw std::runtime_error("cannot write " + file.string());
        };
    }

    std::vector<EpisodeRecord> records;
    records.reserve(plan.cfg.n_episodes);
    SeedOutcome outcome;
    outcome.seed = seed;
    for (std::size_t k = 0; k < plan.cfg.n_episodes; ++k) {
        records.push_back(learner.step(oracle, backend, observer));
        if (records.back().max_gap() > plan.cfg.epsilon) ++outcome.violating_episodes;
    }
    outcome.summary = learner.summary();
    outcome.csv = plan.out_dir / seed_file_name(seed);
    std::ofstream out(outcome.csv, std::ios::binary);
    if (out) guard.track(outcome.csv);
    write_csv(out, records, plan.mdp.n_tasks, plan.mdp.n_groups());
    out.close();
    if (!out) throw std::runtime_error("cannot write " + outcome.csv.string());
    return outcome;
}

json summary_json(const ExperimentPlan& plan, const ExperimentResult& result) {
    const std::size_t n_tasks = plan.mdp.n_tasks;
    json tasks = json::array();
    for (std::size_t m = 0; m < n_tasks; ++m) {
        std::vector<double> gaps, regret;
        std::size_t over = 0;
        for (const auto& s : result.seeds) {
            gaps.push_back(s.summary.max_gap[m]);
            regret.push_back(s.summary.cumulative_regret[m]);
            if (s.summary.max_gap[m] > plan.cfg.epsilon) ++over;
        }
        double mean = 0.0;
        for (double r : regret) mean += r;
        mean /= static_cast<double>(regret.size());
        tasks.push_back({
            {"task", m},
            {"max_gap_quantiles",
             {{"min", quantile(gaps, 0.0)},
              {"q25", quantile(gaps, 0.25)},
              {"median", quantile(gaps, 0.5)},
              {"q75", quantile(gaps, 0.75)},
              {"max", quantile(gaps, 1.0)}}},
            {"seeds_exceeding_epsilon", over},
            {"mean_cumulative_regret", mean},
        });
    }
    json seeds = json::array();
    for (const auto& s : result.seeds)
        seeds.push_back({{"seed", s.seed},
                         {"csv", s.csv.filename().string()},
                         {"cumulative_regret", s.summary.cumulative_regret},
                         {"max_gap", s.summary.max_gap},
                         {"fallback_episodes", s.summary.fallback_episodes},
                         {"lp_anomalies", s.summary.lp_anomalies},
                         {"violating_episodes", s.violating_episodes}});
    return {{"format_version", kManifestVersion},
            {"epsilon", plan.cfg.epsilon},
            {"oracle_objective", result.oracle.objective},
            {"tasks", tasks},
            {"seeds", seeds}};
}

json manifest_json(const ExperimentPlan& plan, const ExperimentResult& result) {
    json seeds = json::array();
    for (const auto& s : result.seeds) seeds.push_back({{"seed", s.seed}, {"csv", s.csv.filename().string()}});
    return {{"format_version", kManifestVersion},
            {"config_hash", config_hash(plan)},
            {"code_version", kCodeVersion},
            {"env", plan.env_label},
            {"algo", to_string(plan.algo)},
            {"baseline_task", plan.algo == Algorithm::baseline ? json(plan.baseline_task) : json(nullptr)},
            {"episodes", plan.cfg.n_episodes},
            {"epsilon", plan.cfg.epsilon},
            {"epsilon0", plan.cfg.epsilon0},
            {"delta", plan.cfg.delta},
            {"alpha_variant", alpha_name(plan.cfg.alpha_rule)},
            {"radius_scale", plan.cfg.radius_scale},
            {"schedule", plan.cfg.schedule == SamplingSchedule::all_groups ? "all_groups" : "round_robin"},
            {"n_tasks", plan.mdp.n_tasks},
            {"n_groups", plan.mdp.n_groups()},
            {"csv_header", csv_header(plan.mdp.n_tasks, plan.mdp.n_groups())},
            {"seeds", seeds}};
}

void write_json(const fs::path& path, const json& doc, OutputGuard& guard) {
    std::ofstream out(path, std::ios::binary);
    if (out) guard.track(path);
    out << doc.dump(2) << '\n';
    out.close();
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    validate_plan(plan);
    ExperimentResult result;
    result.oracle = compute_fair_optimum(plan.mdp, plan.cfg.epsilon);

    OutputGuard guard(plan.out_dir);
    if (plan.dump_lp) fs::create_directories(plan.out_dir / "lp");

    result.seeds.resize(plan.seeds.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&]() {
        while (!failed) {
            const std::size_t i = next++;
            if (i >= plan.seeds.size()) return;
            try {
                result.seeds[i] = run_seed(plan, plan.seeds[i], result.oracle, guard);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                failed = true;
            }
        }
    };
    const std::size_t n_workers = std::min(plan.parallel, plan.seeds.size());
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) {
        if (plan.dump_lp) {
            std::error_code ec;
            fs::remove(plan.out_dir / "lp", ec);
        }
        std::rethrow_exception(first_error);
    }

    result.manifest = plan.out_dir / "manifest.json";
    result.summary = plan.out_dir / "summary.json";
    write_json(result.manifest, manifest_json(plan, result), guard);
    write_json(result.summary, summary_json(plan, result), guard);
    guard.commit();
    return result;
}

}  // namespace fairmt
