#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "datev/config.hpp"
#include "datev/env.hpp"
#include "datev/policies.hpp"

namespace datev {

/// One decision round as logged to the episode CSV.
struct EpisodeRecord {
    std::int64_t task_id = 0;
    Phase phase = Phase::Exploitation;
    int k = 0;               // |selected|
    double reward = 0.0;     // realized
    double oracle_u = 0.0;   // expected reward of the optimal set
    double policy_u = 0.0;   // expected reward of the chosen set
    double regret = 0.0;     // oracle_u - policy_u
    double cum_regret = 0.0;
    bool misexploit = false;
    double sim_time = 0.0;  // simulated decision time (seconds)
};

struct RunSummary {
    std::string policy;
    std::uint64_t seed = 0;
    std::int64_t tasks = 0;
    double cum_reward = 0.0;
    double cum_regret = 0.0;
    std::int64_t misexploitations = 0;
    std::int64_t explorations = 0;
    std::int64_t semi_explorations = 0;
    std::int64_t exploitations = 0;
    std::int64_t dropped = 0;
    double window_avg_reward = 0.0;  // mean realized reward over the final window
    std::int64_t window = 2000;
};

struct EpisodeLog {
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<EpisodeRecord> records;
    RunSummary summary;
};

std::unique_ptr<World> make_world(const RunConfig& config, std::uint64_t seed);

/// Replays one policy against one seeded world: drain feedback due before
/// each decision, select, log realized/expected rewards and exact regret,
/// queue the new feedback. Non-delayed runs drain everything right after
/// each decision; every run flushes the queue at the end.
EpisodeLog run_single(const RunConfig& config, const std::string& policy, std::uint64_t seed);

/// All seeds x policies on a worker pool; writes episodes_<policy>_<seed>.csv
/// per job plus one summary.csv, all byte-deterministic for a fixed config.
std::vector<RunSummary> run_experiment(const RunConfig& config, const std::string& out_dir);

std::string episodes_csv(const EpisodeLog& log);
std::string summary_csv(const std::vector<RunSummary>& summaries);

/// Aggregates episode CSVs previously written to `dir` into a readable
/// per-policy report (reward, windowed averages, regret curve samples,
/// stale-estimate decision counts).
std::string summarize_directory(const std::string& dir);

}  // namespace datev
