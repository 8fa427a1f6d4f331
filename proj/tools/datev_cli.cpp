#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "datev/bench.hpp"
#include "datev/config.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Overrides are spliced into the JSON before parsing so they pass through
// the same validation as file-borne values.
datev::RunConfig load_with_overrides(const std::string& path, const std::string& seeds_csv,
                                     const std::string& mode) {
    nlohmann::json doc = nlohmann::json::parse(read_file(path));
    if (!seeds_csv.empty()) {
        std::vector<std::uint64_t> seeds;
        std::stringstream ss(seeds_csv);
        std::string token;
        while (std::getline(ss, token, ',')) {
            if (token.empty()) continue;
            seeds.push_back(std::stoull(token));
        }
        doc["seeds"] = seeds;
    }
    if (!mode.empty()) doc["mode"] = mode;
    return datev::parse_run_config(doc.dump());
}

int report_config_error(const datev::ConfigError& e) {
    std::cerr << "invalid config:\n";
    for (const std::string& v : e.violations()) std::cerr << "  - " << v << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DATE-V task-replication bandit simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, seeds_csv, mode, in_dir;

    CLI::App* run = app.add_subcommand("run", "Run the configured experiment");
    run->add_option("--config", config_path, "Config file (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory for CSVs")->required();
    run->add_option("--seeds", seeds_csv, "Comma-separated seed list override, e.g. 1,2,3");
    run->add_option("--mode", mode, "Environment override: synthetic or trace");

    CLI::App* summarize = app.add_subcommand("summarize", "Summarize a run directory");
    summarize->add_option("--in", in_dir, "Directory holding episodes_*.csv")->required();

    CLI::App* validate = app.add_subcommand("validate-config", "Validate a config file");
    validate->add_option("--config", config_path, "Config file (JSON)")->required();

    app.add_subcommand("default-config", "Print the built-in defaults as a config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            datev::RunConfig config = load_with_overrides(config_path, seeds_csv, mode);
            std::vector<datev::RunSummary> summaries = datev::run_experiment(config, out_dir);
            std::cout << datev::summary_csv(summaries);
            std::cout << "wrote " << summaries.size() << " episode files + summary.csv to "
                      << out_dir << "\n";
        } else if (summarize->parsed()) {
            std::cout << datev::summarize_directory(in_dir);
        } else if (validate->parsed()) {
            datev::load_run_config(config_path);
            std::cout << "config OK\n";
        } else {  // default-config
            std::cout << datev::default_config_json() << "\n";
        }
    } catch (const datev::ConfigError& e) {
        return report_config_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
