#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "datev/env.hpp"
#include "datev/learner.hpp"
#include "datev/trace.hpp"

namespace datev {

/// Everything a run needs. JSON shape mirrors the nesting here; every field
/// is optional in the file and defaults to the value below, except that trace
/// mode requires trace.manifest.
struct RunConfig {
    std::string mode = "synthetic";  // synthetic | trace
    std::int64_t horizon = 10000;    // number of tasks; also fixes the partition
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<std::string> policies = {"datev", "oracle", "ucb", "mlinucb", "random"};
    bool delayed_feedback = true;
    int threads = 0;  // 0 = one per hardware thread

    LearnerConfig learner;      // alpha, dim, eta (horizon is synced from above)
    SyntheticConfig synthetic;  // synthetic-mode environment

    // trace mode
    std::string trace_manifest;
    RegionSpec region;
    int rsu_count = 12;
    double rsu_spacing = 200.0;
    double coverage_radius = 300.0;
    RadioParams radio;
    ContextBounds context_bounds;
    TaskGenConfig task_gen;
    double sev_fraction = 0.5;
    double cpu_min = 2e9;
    double cpu_max = 8e9;
    int mc_samples = 1000;

    bool ucb_pair_arms = false;
    double mlinucb_alpha = 1.0;
};

/// Carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Parses and fully validates; unknown keys anywhere are violations.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// The defaults above as a complete JSON document (self-documenting config).
std::string default_config_json();

}  // namespace datev
