#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairmt/learner.hpp"
#include "fairmt/mdp.hpp"
#include "fairmt/oracle.hpp"

namespace fairmt {

extern const char* const kCodeVersion;

enum class Algorithm { multitask, baseline };

const char* to_string(Algorithm algo);

struct ExperimentPlan {
    TaskedGroupMDP mdp;
    std::string env_label;  // where the env came from; recorded, not hashed
    Algorithm algo = Algorithm::multitask;
    std::size_t baseline_task = 0;
    std::vector<std::uint64_t> seeds;
    FairnessConfig cfg;  // cfg.n_episodes is K
    std::filesystem::path out_dir;
    std::size_t parallel = 1;
    bool dump_lp = false;
};

/// Throws std::invalid_argument for plans that cannot run.
void validate_plan(const ExperimentPlan& plan);

/// FNV-1a (64 bit) of the canonical plan description: environment tables,
/// algorithm, K and every FairnessConfig field. Seeds, output directory,
/// parallelism and --dump-lp do not enter the hash.
std::string config_hash(const ExperimentPlan& plan);

struct RegretCurve {
    std::vector<std::vector<double>> per_task;  // [task][episode], cumulative
    std::vector<double> summed;                 // cumulative over tasks
};

/// Recomputes cumulative regret from the recorded true returns:
/// per task, sum over episodes and groups of J(pi*) - J(pi^k).
RegretCurve regret_curve(const std::vector<EpisodeRecord>& records, const RegretOracle& oracle);

/// Per-seed log: header plus one row per episode.
///   episode,mode,return_t{m}_g{z}...,gap_t{m}_g{i}_g{j}...,regret_t{m}...
/// Indices are 0-based; returns loop groups inside tasks, gaps loop pairs
/// (i<j) inside tasks. Reals use the shortest representation that parses
/// back to the same double.
std::string csv_header(std::size_t n_tasks, std::size_t n_groups);
void write_csv(std::ostream& out, const std::vector<EpisodeRecord>& records, std::size_t n_tasks,
               std::size_t n_groups);

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvLog {
    std::size_t n_tasks = 0;
    std::size_t n_groups = 0;
    std::vector<EpisodeRecord> records;  // duration_seconds is not logged and reads back as 0
};

CsvLog parse_csv(std::istream& in);

/// Quantiles by linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::filesystem::path csv;
    RunSummary summary;
    std::size_t violating_episodes = 0;  // episodes whose true max gap exceeds epsilon
};

struct ExperimentResult {
    RegretOracle oracle;
    std::vector<SeedOutcome> seeds;  // in plan order
    std::filesystem::path manifest;
    std::filesystem::path summary;
};

/// Runs every seed (at most plan.parallel at a time), writes one CSV per seed,
/// manifest.json and summary.json. On failure everything written by this call
/// is removed and the first error is rethrown.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// CSV file name of a seed inside the output directory.
std::string seed_file_name(std::uint64_t seed);

}  // namespace fairmt
